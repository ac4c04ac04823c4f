#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include <unistd.h>

namespace fixture {

otkit::DiscreteMeasure random_measure(std::mt19937_64& rng, std::size_t dim, std::size_t n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> mass(0.05, 1.0);
  std::vector<double> coords(n * dim);
  for (double& c : coords) c = unit(rng);
  std::vector<double> weights(n);
  for (double& w : weights) w = mass(rng);
  return otkit::DiscreteMeasure(dim, std::move(coords), std::move(weights)).normalized();
}

otkit::DiscreteMeasure random_cloud(std::mt19937_64& rng, std::size_t dim, std::size_t n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> coords(n * dim);
  for (double& c : coords) c = unit(rng);
  return otkit::DiscreteMeasure::uniform(dim, std::move(coords));
}

otkit::GridDensity bumps_1d(std::size_t n, const std::vector<Bump>& bumps, double floor, double lo,
                            double hi) {
  const double h = (hi - lo) / static_cast<double>(n);
  std::vector<double> v(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = lo + (static_cast<double>(k) + 0.5) * h;
    for (const Bump& b : bumps) {
      const double z = (x - b.center) / b.sigma;
      v[k] += b.weight * std::exp(-0.5 * z * z);
    }
  }
  const double peak = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (double& x : v) {
    x += floor * peak;
    total += x * h;
  }
  for (double& x : v) x /= total;
  return otkit::GridDensity::line(std::move(v), h, lo + 0.5 * h);
}

otkit::GridDensity gaussian_2d(std::size_t width, std::size_t height, double cx, double cy,
                               double sigma) {
  std::vector<double> v(width * height);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      v[y * width + x] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
    }
  }
  return otkit::GridDensity::image(width, height, std::move(v));
}

ScratchDir::ScratchDir() {
  static std::atomic<unsigned> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("otkit-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

ScratchDir::~ScratchDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

double l1_distance(const otkit::GridDensity& a, const otkit::GridDensity& b) {
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) total += std::abs(a.values[k] - b.values[k]);
  return total * a.cell_volume();
}

}  // namespace fixture
