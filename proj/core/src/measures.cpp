#include "otkit/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "otkit/error.hpp"
#include "otkit/parallel.hpp"

namespace otkit {

DiscreteMeasure::DiscreteMeasure(std::size_t dim, std::vector<double> coords,
                                 std::vector<double> weights)
    : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights)) {
  if (dim_ == 0) fail(ErrorCode::DimensionError, "measure dimension must be positive");
  if (weights_.empty()) fail(ErrorCode::InvalidArgument, "measure needs at least one atom");
  if (coords_.size() != weights_.size() * dim_) {
    fail(ErrorCode::DimensionMismatch,
         "expected " + std::to_string(weights_.size() * dim_) + " coordinates, got " +
             std::to_string(coords_.size()));
  }
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i])) {
      fail(ErrorCode::RangeError, "weight " + std::to_string(i) + " is negative or not finite");
    }
  }
  for (double c : coords_) {
    if (!std::isfinite(c)) fail(ErrorCode::RangeError, "non-finite coordinate");
  }
}

DiscreteMeasure DiscreteMeasure::on_line(std::vector<double> xs, std::vector<double> weights) {
  return DiscreteMeasure(1, std::move(xs), std::move(weights));
}

DiscreteMeasure DiscreteMeasure::uniform(std::size_t dim, std::vector<double> coords) {
  if (dim == 0) fail(ErrorCode::DimensionError, "measure dimension must be positive");
  const std::size_t n = coords.size() / dim;
  return DiscreteMeasure(dim, std::move(coords),
                         std::vector<double>(n, n ? 1.0 / static_cast<double>(n) : 0.0));
}

double DiscreteMeasure::total_mass() const noexcept {
  return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

DiscreteMeasure DiscreteMeasure::normalized() const {
  const double total = total_mass();
  if (!(total > 0.0)) fail(ErrorCode::AllZero, "measure has zero total mass");
  std::vector<double> w(weights_);
  for (double& x : w) x /= total;
  return DiscreteMeasure(dim_, coords_, std::move(w));
}

DiscreteMeasure DiscreteMeasure::without_zeros(std::vector<std::size_t>* kept) const {
  std::vector<double> coords;
  std::vector<double> weights;
  if (kept) kept->clear();
  for (std::size_t i = 0; i < size(); ++i) {
    if (weights_[i] <= 0.0) continue;
    weights.push_back(weights_[i]);
    auto p = point(i);
    coords.insert(coords.end(), p.begin(), p.end());
    if (kept) kept->push_back(i);
  }
  if (weights.empty()) fail(ErrorCode::AllZero, "measure has no positive atoms");
  return DiscreteMeasure(dim_, std::move(coords), std::move(weights));
}

GridDensity GridDensity::line(std::vector<double> values, double spacing, double origin) {
  GridDensity g{{values.size()}, {spacing}, {origin}, std::move(values)};
  g.validate();
  return g;
}

GridDensity GridDensity::image(std::size_t width, std::size_t height, std::vector<double> values,
                               double spacing) {
  GridDensity g{{width, height}, {spacing, spacing}, {0.0, 0.0}, std::move(values)};
  g.validate();
  return g;
}

double GridDensity::cell_volume() const noexcept {
  double v = 1.0;
  for (double h : spacing) v *= h;
  return v;
}

double GridDensity::mass() const noexcept {
  return std::accumulate(values.begin(), values.end(), 0.0) * cell_volume();
}

double GridDensity::max_value() const noexcept {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

std::vector<double> GridDensity::center_of(std::size_t flat) const {
  std::vector<double> c(dims.size());
  for (std::size_t a = 0; a < dims.size(); ++a) {
    c[a] = center(a, flat % dims[a]);
    flat /= dims[a];
  }
  return c;
}

bool GridDensity::same_grid(const GridDensity& other, double tol) const noexcept {
  if (dims != other.dims) return false;
  for (std::size_t a = 0; a < dims.size(); ++a) {
    if (std::abs(spacing[a] - other.spacing[a]) > tol * std::abs(spacing[a])) return false;
    if (std::abs(origin[a] - other.origin[a]) > tol * std::max(1.0, std::abs(origin[a]))) {
      return false;
    }
  }
  return true;
}

void GridDensity::validate() const {
  if (dims.empty()) fail(ErrorCode::DimensionError, "grid needs at least one axis");
  if (spacing.size() != dims.size() || origin.size() != dims.size()) {
    fail(ErrorCode::DimensionMismatch, "grid spacing/origin do not match the number of axes");
  }
  std::size_t cells = 1;
  for (std::size_t a = 0; a < dims.size(); ++a) {
    if (dims[a] == 0) fail(ErrorCode::DimensionError, "grid axis has zero extent");
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) {
      fail(ErrorCode::RangeError, "grid spacing must be positive");
    }
    cells *= dims[a];
  }
  if (cells != values.size()) {
    fail(ErrorCode::DimensionMismatch, "grid has " + std::to_string(values.size()) +
                                           " values but extents describe " +
                                           std::to_string(cells) + " cells");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0) || !std::isfinite(values[i])) {
      fail(ErrorCode::RangeError, "grid value " + std::to_string(i) + " is negative or not finite");
    }
  }
}

double CostMatrix::max() const noexcept {
  return entries.empty() ? 0.0 : *std::max_element(entries.begin(), entries.end());
}

CostMatrix CostMatrix::transposed() const {
  CostMatrix t{cols, rows, order, std::vector<double>(entries.size())};
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) t.entries[j * rows + i] = entries[i * cols + j];
  }
  return t;
}

double Cdf::operator()(double x) const {
  if (knots.empty()) return 0.0;
  if (kind == Kind::Step) {
    // right-continuous: last knot <= x
    auto it = std::upper_bound(knots.begin(), knots.end(), x);
    if (it == knots.begin()) return 0.0;
    return cumulative[static_cast<std::size_t>(it - knots.begin()) - 1];
  }
  if (x <= knots.front()) return 0.0;
  if (x >= knots.back()) return 1.0;
  auto it = std::upper_bound(knots.begin(), knots.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - knots.begin());
  const double t = (x - knots[k - 1]) / (knots[k] - knots[k - 1]);
  return cumulative[k - 1] + t * (cumulative[k] - cumulative[k - 1]);
}

GridDensity normalize(const GridDensity& raw, double epsilon) {
  raw.validate();
  if (!(epsilon >= 0.0)) fail(ErrorCode::RangeError, "epsilon must be nonnegative");
  GridDensity out = raw;
  double total = 0.0;
  for (double& v : out.values) {
    v += epsilon;
    total += v;
  }
  total *= raw.cell_volume();
  if (!(total > 0.0)) fail(ErrorCode::AllZero, "density is identically zero and epsilon is 0");
  for (double& v : out.values) v /= total;
  return out;
}

double default_epsilon(const GridDensity& raw) noexcept { return 1e-8 * raw.max_value(); }

Cdf cdf(const DiscreteMeasure& measure) {
  if (measure.dim() != 1) fail(ErrorCode::DimensionError, "cdf needs a one-dimensional measure");
  const double total = measure.total_mass();
  if (!(total > 0.0)) fail(ErrorCode::AllZero, "measure has zero total mass");
  std::vector<std::size_t> order(measure.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return measure.point(a)[0] < measure.point(b)[0];
  });
  Cdf out;
  out.kind = Cdf::Kind::Step;
  double running = 0.0;
  for (std::size_t idx : order) {
    const double x = measure.point(idx)[0];
    running += measure.weight(idx);
    if (!out.knots.empty() && out.knots.back() == x) {
      out.cumulative.back() = running / total;
    } else {
      out.knots.push_back(x);
      out.cumulative.push_back(running / total);
    }
  }
  out.cumulative.back() = 1.0;
  return out;
}

Cdf cdf(const GridDensity& density) {
  density.validate();
  if (density.dimension() != 1) fail(ErrorCode::DimensionError, "cdf needs a one-dimensional grid");
  const std::size_t n = density.values.size();
  const double h = density.spacing[0];
  const double total = std::accumulate(density.values.begin(), density.values.end(), 0.0);
  if (!(total > 0.0)) fail(ErrorCode::AllZero, "density is identically zero");
  Cdf out;
  out.kind = Cdf::Kind::Linear;
  out.knots.resize(n + 1);
  out.cumulative.resize(n + 1);
  const double left = density.origin[0] - 0.5 * h;
  double running = 0.0;
  out.knots[0] = left;
  out.cumulative[0] = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    running += density.values[k];
    out.knots[k + 1] = left + h * static_cast<double>(k + 1);
    out.cumulative[k + 1] = running / total;
  }
  out.cumulative[n] = 1.0;
  return out;
}

namespace {

// first index with cumulative >= z
std::size_t first_reaching(const Cdf& f, double z) {
  auto it = std::lower_bound(f.cumulative.begin(), f.cumulative.end(), z);
  if (it == f.cumulative.end()) return f.cumulative.size() - 1;
  return static_cast<std::size_t>(it - f.cumulative.begin());
}

}  // namespace

double pseudoinverse(const Cdf& f, double z) {
  if (!(z > 0.0 && z < 1.0)) fail(ErrorCode::RangeError, "pseudoinverse needs z in (0,1)");
  return quantile(f, z);
}

double quantile(const Cdf& f, double z) noexcept {
  if (f.kind == Cdf::Kind::Step) {
    if (z <= 0.0) {
      // leftmost atom with positive mass
      auto it = std::upper_bound(f.cumulative.begin(), f.cumulative.end(), 0.0);
      return f.knots[static_cast<std::size_t>(it - f.cumulative.begin())];
    }
    return f.knots[first_reaching(f, std::min(z, 1.0))];
  }
  if (z <= 0.0) {
    auto it = std::upper_bound(f.cumulative.begin(), f.cumulative.end(), 0.0);
    return f.knots[static_cast<std::size_t>(it - f.cumulative.begin()) - 1];
  }
  if (z >= 1.0) return f.knots[first_reaching(f, 1.0)];
  const std::size_t k = first_reaching(f, z);  // k >= 1 because cumulative[0] == 0 < z
  const double lo = f.cumulative[k - 1];
  const double hi = f.cumulative[k];
  return f.knots[k - 1] + (z - lo) / (hi - lo) * (f.knots[k] - f.knots[k - 1]);
}

CostMatrix cost_matrix(const DiscreteMeasure& source, const DiscreteMeasure& target, double p) {
  if (source.dim() != target.dim()) {
    fail(ErrorCode::DimensionMismatch, "source is " + std::to_string(source.dim()) +
                                           "-dimensional, target is " +
                                           std::to_string(target.dim()) + "-dimensional");
  }
  if (!(p >= 1.0)) fail(ErrorCode::InvalidOrder, "cost order p must be >= 1");
  CostMatrix c{source.size(), target.size(), p, std::vector<double>(source.size() * target.size())};
  const std::size_t d = source.dim();
  parallel_for(
      c.rows,
      [&](std::size_t i) {
        auto x = source.point(i);
        for (std::size_t j = 0; j < c.cols; ++j) {
          auto y = target.point(j);
          double sq = 0.0;
          for (std::size_t a = 0; a < d; ++a) {
            const double diff = x[a] - y[a];
            sq += diff * diff;
          }
          double v;
          if (p == 2.0) {
            v = sq;
          } else if (p == 1.0) {
            v = std::sqrt(sq);
          } else {
            v = std::pow(std::sqrt(sq), p);
          }
          c.entries[i * c.cols + j] = v;
        }
      },
      c.cols * d);
  return c;
}

DiscreteMeasure to_measure(const GridDensity& density, bool keep_zeros) {
  density.validate();
  const double vol = density.cell_volume();
  const std::size_t d = density.dimension();
  std::vector<double> coords;
  std::vector<double> weights;
  coords.reserve(density.size() * d);
  weights.reserve(density.size());
  for (std::size_t k = 0; k < density.size(); ++k) {
    if (!keep_zeros && density.values[k] <= 0.0) continue;
    auto c = density.center_of(k);
    coords.insert(coords.end(), c.begin(), c.end());
    weights.push_back(density.values[k] * vol);
  }
  if (weights.empty()) fail(ErrorCode::AllZero, "density is identically zero");
  return DiscreteMeasure(d, std::move(coords), std::move(weights));
}

}  // namespace otkit
