#pragma once

#include <cstddef>
#include <vector>

#include "otkit/measures.hpp"
#include "otkit/plan.hpp"

namespace otkit {

/// Nondecreasing 1-D map sampled at increasing knots. Evaluation between
/// knots is linear; outside the knot range the end segments are extended.
struct MonotoneMap1D {
  std::vector<double> domain_knots;
  std::vector<double> image_values;

  double operator()(double x) const;
  /// Generalized inverse: the x with f(x) = y, using the same interpolation.
  double inverse(double y) const;
  bool is_monotone(bool strict = false) const noexcept;
};

/// Closed-form W_p between two 1-D discrete measures. Exact: the quantile
/// functions are step functions and the integral is summed over the merged
/// breakpoints.
double wasserstein_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p);

/// W_p between 1-D grid densities by midpoint quadrature over n_quantiles
/// equal z-bins of the quantile functions.
double wasserstein_1d(const GridDensity& mu, const GridDensity& nu, double p,
                      std::size_t n_quantiles = 1000);
double wasserstein_1d(const Cdf& mu, const Cdf& nu, double p, std::size_t n_quantiles = 1000);

/// The monotone (north-west corner on sorted atoms) coupling, which is an
/// optimal plan for every convex cost |x - y|^p. Plan indices refer to the
/// original atom order; cost is filled with the p-th power cost.
TransportPlan monotone_plan_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                               double p = 2.0);

/// f = F_nu^{-1} o F_mu sampled at the cell centers of mu. Both densities
/// must be strictly positive (ZeroDensity otherwise).
MonotoneMap1D optimal_map_1d(const GridDensity& mu, const GridDensity& nu);

/// F_to^{-1}(F_from(x)) at a single point, with the closed-interval quantile
/// convention at the ends of the support.
double transport_map_value(const Cdf& from, const Cdf& to, double x);

}  // namespace otkit
