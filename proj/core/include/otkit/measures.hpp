#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace otkit {

/// Weighted point cloud mu = sum_i w_i delta_{x_i} in R^d.
///
/// Points are stored row-major in a flat buffer (point i occupies
/// coords[i*d .. i*d+d)). Weights are nonnegative; they are not forced to sum
/// to one unless normalized() is called.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  DiscreteMeasure(std::size_t dim, std::vector<double> coords, std::vector<double> weights);

  static DiscreteMeasure on_line(std::vector<double> xs, std::vector<double> weights);
  /// Uniform weights 1/n on the given points.
  static DiscreteMeasure uniform(std::size_t dim, std::vector<double> coords);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const double> point(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<double>& coords() const noexcept { return coords_; }
  double total_mass() const noexcept;

  /// Copy with weights rescaled to sum to one. Throws AllZero on zero mass.
  DiscreteMeasure normalized() const;
  /// Copy without the zero-weight atoms; `kept` receives original indices.
  DiscreteMeasure without_zeros(std::vector<std::size_t>* kept = nullptr) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
  std::vector<double> weights_;
};

/// Nonnegative intensity field on a regular grid. Axis 0 varies fastest, so a
/// 2-D grid with dims {width, height} stores rows of width contiguous cells,
/// matching the raster order of an image.
struct GridDensity {
  std::vector<std::size_t> dims;
  std::vector<double> spacing;
  std::vector<double> origin;  // coordinate of the first cell center
  std::vector<double> values;

  static GridDensity line(std::vector<double> values, double spacing = 1.0, double origin = 0.0);
  static GridDensity image(std::size_t width, std::size_t height, std::vector<double> values,
                           double spacing = 1.0);

  std::size_t dimension() const noexcept { return dims.size(); }
  std::size_t size() const noexcept { return values.size(); }
  double cell_volume() const noexcept;
  /// sum(values) * cell_volume
  double mass() const noexcept;
  double max_value() const noexcept;
  /// Coordinate of the cell center along `axis` for integer index `k`.
  double center(std::size_t axis, std::size_t k) const noexcept {
    return origin[axis] + spacing[axis] * static_cast<double>(k);
  }
  /// Center of the flat cell index as a d-vector.
  std::vector<double> center_of(std::size_t flat) const;
  bool same_grid(const GridDensity& other, double tol = 1e-12) const noexcept;

  /// Throws when the shape fields disagree with each other or a value is negative.
  void validate() const;
};

/// c(x_i, y_j) = |x_i - y_j|^p for every source/target pair, row-major.
struct CostMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double order = 1.0;
  std::vector<double> entries;

  double operator()(std::size_t i, std::size_t j) const noexcept { return entries[i * cols + j]; }
  double max() const noexcept;
  CostMatrix transposed() const;
};

/// Cumulative distribution function of a 1-D measure. Step CDFs come from
/// discrete measures (right-continuous jumps at the knots); Linear CDFs come
/// from grid densities and interpolate linearly between cell edges.
struct Cdf {
  enum class Kind { Step, Linear };

  Kind kind = Kind::Linear;
  std::vector<double> knots;
  std::vector<double> cumulative;

  double operator()(double x) const;
};

/// Output values (raw + epsilon) rescaled to unit mass; shape unchanged.
GridDensity normalize(const GridDensity& raw, double epsilon);
/// The floor used when no explicit epsilon is given: 1e-8 * max(value).
double default_epsilon(const GridDensity& raw) noexcept;

Cdf cdf(const DiscreteMeasure& measure);
Cdf cdf(const GridDensity& density);

/// inf{x : F(x) >= z} for z in (0,1). Throws RangeError outside (0,1).
double pseudoinverse(const Cdf& cdf, double z);
/// Same rule extended to the closed interval: z = 0 gives the left end of the
/// support and z = 1 the right end.
double quantile(const Cdf& cdf, double z) noexcept;

CostMatrix cost_matrix(const DiscreteMeasure& source, const DiscreteMeasure& target, double p);

/// One atom per grid cell at the cell center with mass value * cell_volume.
DiscreteMeasure to_measure(const GridDensity& density, bool keep_zeros = false);

}  // namespace otkit
