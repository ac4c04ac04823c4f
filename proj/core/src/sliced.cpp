#include "otkit/sliced.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "otkit/error.hpp"
#include "otkit/exact1d.hpp"
#include "otkit/parallel.hpp"

namespace otkit {

namespace {

// CDF of U[-a/2, a/2] + U[-b/2, b/2] with a >= b, shifted so G(0) = 1/2.
class Footprint {
 public:
  Footprint(double w1, double w2) : a_(std::max(w1, w2)), b_(std::min(w1, w2)) {}

  double half_width() const noexcept { return 0.5 * (a_ + b_); }

  double operator()(double s) const noexcept {
    const double sign = s < 0.0 ? -1.0 : 1.0;
    return 0.5 + sign * half(std::abs(s));
  }

 private:
  double half(double s) const noexcept {
    const double s1 = 0.5 * (a_ - b_);
    const double s2 = 0.5 * (a_ + b_);
    if (s >= s2) return 0.5;
    if (s <= s1) return s / a_;
    const double r = s2 - s;
    return (a_ - b_) / (2.0 * a_) + (b_ * b_ - r * r) / (2.0 * a_ * b_);
  }

  double a_;
  double b_;
};

struct Projection {
  GridDensity profile;
  double mass_ratio = 0.0;
};

void require_image(const GridDensity& image) {
  image.validate();
  if (image.dimension() != 2) fail(ErrorCode::DimensionError, "radon needs a 2-D image");
  const double h0 = image.spacing[0];
  const double h1 = image.spacing[1];
  if (std::abs(h0 - h1) > 1e-12 * std::max(h0, h1)) {
    fail(ErrorCode::InvalidArgument, "radon needs equal spacing on both axes");
  }
}

Projection project(const GridDensity& image, double theta) {
  const std::size_t width = image.dims[0];
  const std::size_t height = image.dims[1];
  const double h = image.spacing[0];
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  const double cx = image.origin[0] + 0.5 * h * static_cast<double>(width - 1);
  const double cy = image.origin[1] + 0.5 * h * static_cast<double>(height - 1);

  const double diagonal = std::hypot(static_cast<double>(width), static_cast<double>(height));
  auto length = static_cast<std::size_t>(std::ceil(diagonal)) + 2;
  if (length % 2 == 0) ++length;
  const double center_t = cx * ct + cy * st;
  const double t0 = center_t - 0.5 * h * static_cast<double>(length - 1);

  const Footprint shape(h * std::abs(ct), h * std::abs(st));
  const double reach = shape.half_width();
  std::vector<double> bins(length, 0.0);
  double image_mass = 0.0;
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double mass = image.values[y * width + x];
      if (mass == 0.0) continue;
      image_mass += mass;
      const double t = image.center(0, x) * ct + image.center(1, y) * st;
      // bin k covers [t0 + (k - 1/2) h, t0 + (k + 1/2) h]
      const double lo = (t - reach - t0) / h + 0.5;
      const double hi = (t + reach - t0) / h + 0.5;
      const auto k0 = static_cast<std::ptrdiff_t>(std::floor(lo));
      const auto k1 = static_cast<std::ptrdiff_t>(std::floor(hi));
      double prev = 0.0;
      for (std::ptrdiff_t k = k0; k <= k1; ++k) {
        const double right_edge = t0 + (static_cast<double>(k) + 0.5) * h;
        const double upto = k == k1 ? 1.0 : shape(right_edge - t);
        if (k >= 0 && k < static_cast<std::ptrdiff_t>(length)) {
          bins[static_cast<std::size_t>(k)] += mass * (upto - prev);
        }
        prev = upto;
      }
    }
  }
  double total = 0.0;
  for (double v : bins) total += v;
  Projection out;
  out.mass_ratio = image_mass > 0.0 ? total / image_mass : 0.0;
  if (!(total > 0.0)) fail(ErrorCode::AllZero, "image is identically zero");
  for (double& v : bins) v /= total * h;
  out.profile = GridDensity::line(std::move(bins), h, t0);
  return out;
}

std::vector<Projection> project_all(const GridDensity& image, std::size_t n_angles) {
  require_image(image);
  if (n_angles == 0) fail(ErrorCode::InvalidArgument, "n_angles must be at least 1");
  std::vector<Projection> out(n_angles);
  parallel_for(
      n_angles,
      [&](std::size_t k) {
        out[k] = project(image, std::numbers::pi * static_cast<double>(k) /
                                    static_cast<double>(n_angles));
      },
      image.size());
  return out;
}

}  // namespace

Sinogram radon(const GridDensity& image, std::size_t n_angles) {
  auto projections = project_all(image, n_angles);
  Sinogram s;
  s.angles.resize(n_angles);
  s.profiles.reserve(n_angles);
  for (std::size_t k = 0; k < n_angles; ++k) {
    s.angles[k] = std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_angles);
    s.profiles.push_back(std::move(projections[k].profile));
  }
  return s;
}

std::vector<double> radon_mass_ratios(const GridDensity& image, std::size_t n_angles) {
  const auto projections = project_all(image, n_angles);
  std::vector<double> out;
  out.reserve(n_angles);
  for (const auto& p : projections) out.push_back(p.mass_ratio);
  return out;
}

double sliced_wasserstein(const Sinogram& a, const Sinogram& b, double p,
                          std::size_t n_quantiles) {
  if (!(p >= 1.0)) fail(ErrorCode::InvalidOrder, "order p must be >= 1");
  if (a.angles.size() != b.angles.size() || a.angles.empty()) {
    fail(ErrorCode::DimensionMismatch, "sinograms have different angle counts");
  }
  const std::size_t n = a.angles.size();
  std::vector<double> terms(n);
  parallel_for(
      n,
      [&](std::size_t k) {
        terms[k] = std::pow(wasserstein_1d(a.profiles[k], b.profiles[k], p, n_quantiles), p);
      },
      n_quantiles);
  double sum = 0.0;
  for (double t : terms) sum += t;
  return std::pow(sum / static_cast<double>(n), 1.0 / p);
}

double sliced_wasserstein(const GridDensity& a, const GridDensity& b, double p,
                          std::size_t n_angles, std::size_t n_quantiles) {
  if (!(p >= 1.0)) fail(ErrorCode::InvalidOrder, "order p must be >= 1");
  return sliced_wasserstein(radon(a, n_angles), radon(b, n_angles), p, n_quantiles);
}

}  // namespace otkit
