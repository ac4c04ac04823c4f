#pragma once

// Shared test inputs: seeded random measures, Gaussian grids, scratch dirs.

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "otkit/measures.hpp"

namespace fixture {

/// N atoms in [0, 1)^dim with weights drawn from U(0.05, 1), normalized.
otkit::DiscreteMeasure random_measure(std::mt19937_64& rng, std::size_t dim, std::size_t n);

/// Same as random_measure but every weight is 1/n.
otkit::DiscreteMeasure random_cloud(std::mt19937_64& rng, std::size_t dim, std::size_t n);

struct Bump {
  double weight;
  double center;
  double sigma;
};

/// Sum of Gaussian bumps sampled at n cell centers of [lo, hi), plus
/// `floor` times the peak value, normalized to unit mass.
otkit::GridDensity bumps_1d(std::size_t n, const std::vector<Bump>& bumps, double floor = 0.0,
                            double lo = 0.0, double hi = 1.0);

/// Isotropic Gaussian on a width x height unit-spacing grid (pixel centers
/// at integer coordinates), not normalized.
otkit::GridDensity gaussian_2d(std::size_t width, std::size_t height, double cx, double cy,
                               double sigma);

/// Fresh empty directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  ScratchDir();
  ~ScratchDir();
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// sum |a_k - b_k| * cell_volume
double l1_distance(const otkit::GridDensity& a, const otkit::GridDensity& b);

}  // namespace fixture
