#include "otkit/exact1d.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "otkit/error.hpp"

namespace otkit {

namespace {

double power_cost(double d, double p) {
  d = std::abs(d);
  if (p == 1.0) return d;
  if (p == 2.0) return d * d;
  return std::pow(d, p);
}

void require_order(double p) {
  if (!(p >= 1.0)) fail(ErrorCode::InvalidOrder, "order p must be >= 1");
}

std::vector<std::size_t> sorted_positive(const DiscreteMeasure& m) {
  std::vector<std::size_t> idx;
  idx.reserve(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.weight(i) > 0.0) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return m.point(a)[0] < m.point(b)[0]; });
  return idx;
}

void require_line(const DiscreteMeasure& m) {
  if (m.dim() != 1) fail(ErrorCode::DimensionError, "expected a one-dimensional measure");
}

}  // namespace

double MonotoneMap1D::operator()(double x) const {
  const auto& xs = domain_knots;
  const auto& ys = image_values;
  if (xs.size() == 1) return ys[0] + (x - xs[0]);
  std::size_t k;
  if (x <= xs.front()) {
    k = 1;
  } else if (x >= xs.back()) {
    k = xs.size() - 1;
  } else {
    k = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
  }
  const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
  return ys[k - 1] + t * (ys[k] - ys[k - 1]);
}

double MonotoneMap1D::inverse(double y) const {
  const auto& xs = domain_knots;
  const auto& ys = image_values;
  if (xs.size() == 1) return xs[0] + (y - ys[0]);
  std::size_t k;
  if (y <= ys.front()) {
    k = 1;
  } else if (y >= ys.back()) {
    k = ys.size() - 1;
  } else {
    k = static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), y) - ys.begin());
  }
  // skip flat segments so the slope is defined
  while (k + 1 < ys.size() && ys[k] == ys[k - 1]) ++k;
  while (k > 1 && ys[k] == ys[k - 1]) --k;
  if (ys[k] == ys[k - 1]) return xs[k - 1];
  const double t = (y - ys[k - 1]) / (ys[k] - ys[k - 1]);
  return xs[k - 1] + t * (xs[k] - xs[k - 1]);
}

bool MonotoneMap1D::is_monotone(bool strict) const noexcept {
  for (std::size_t k = 1; k < image_values.size(); ++k) {
    if (strict ? !(image_values[k] > image_values[k - 1])
               : !(image_values[k] >= image_values[k - 1])) {
      return false;
    }
  }
  return true;
}

TransportPlan monotone_plan_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
  require_line(mu);
  require_line(nu);
  require_order(p);
  const double mass_a = mu.total_mass();
  const double mass_b = nu.total_mass();
  if (!(mass_a > 0.0) || !(mass_b > 0.0)) fail(ErrorCode::AllZero, "measure has zero mass");
  const auto a = sorted_positive(mu);
  const auto b = sorted_positive(nu);

  TransportPlan plan;
  plan.source_size = mu.size();
  plan.target_size = nu.size();
  plan.method = "exact1d";
  std::size_t i = 0;
  std::size_t j = 0;
  double ra = mu.weight(a[0]) / mass_a;
  double rb = nu.weight(b[0]) / mass_b;
  while (i < a.size() && j < b.size()) {
    const double x = mu.point(a[i])[0];
    const double y = nu.point(b[j])[0];
    if (ra < rb) {
      plan.couplings.push_back({a[i], b[j], ra});
      plan.total_cost += ra * power_cost(x - y, p);
      rb -= ra;
      if (++i < a.size()) ra = mu.weight(a[i]) / mass_a;
    } else if (rb < ra) {
      plan.couplings.push_back({a[i], b[j], rb});
      plan.total_cost += rb * power_cost(x - y, p);
      ra -= rb;
      if (++j < b.size()) rb = nu.weight(b[j]) / mass_b;
    } else {
      plan.couplings.push_back({a[i], b[j], ra});
      plan.total_cost += ra * power_cost(x - y, p);
      if (++i < a.size()) ra = mu.weight(a[i]) / mass_a;
      if (++j < b.size()) rb = nu.weight(b[j]) / mass_b;
    }
  }
  plan.iterations = plan.couplings.size();
  return plan;
}

double wasserstein_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
  const TransportPlan plan = monotone_plan_1d(mu, nu, p);
  return std::pow(std::max(plan.total_cost, 0.0), 1.0 / p);
}

double wasserstein_1d(const Cdf& mu, const Cdf& nu, double p, std::size_t n_quantiles) {
  require_order(p);
  if (n_quantiles == 0) fail(ErrorCode::InvalidArgument, "n_quantiles must be positive");
  const double dz = 1.0 / static_cast<double>(n_quantiles);
  double sum = 0.0;
  for (std::size_t k = 0; k < n_quantiles; ++k) {
    const double z = (static_cast<double>(k) + 0.5) * dz;
    sum += power_cost(quantile(mu, z) - quantile(nu, z), p);
  }
  return std::pow(sum * dz, 1.0 / p);
}

double wasserstein_1d(const GridDensity& mu, const GridDensity& nu, double p,
                      std::size_t n_quantiles) {
  if (mu.dimension() != 1 || nu.dimension() != 1) {
    fail(ErrorCode::DimensionError, "expected one-dimensional grid densities");
  }
  return wasserstein_1d(cdf(mu), cdf(nu), p, n_quantiles);
}

double transport_map_value(const Cdf& from, const Cdf& to, double x) {
  return quantile(to, from(x));
}

MonotoneMap1D optimal_map_1d(const GridDensity& mu, const GridDensity& nu) {
  if (mu.dimension() != 1 || nu.dimension() != 1) {
    fail(ErrorCode::DimensionError, "expected one-dimensional grid densities");
  }
  for (const GridDensity* g : {&mu, &nu}) {
    for (std::size_t k = 0; k < g->size(); ++k) {
      if (!(g->values[k] > 0.0)) {
        fail(ErrorCode::ZeroDensity, "cell " + std::to_string(k) +
                                         " has zero density; normalize with epsilon > 0 first");
      }
    }
  }
  const Cdf from = cdf(mu);
  const Cdf to = cdf(nu);
  MonotoneMap1D f;
  f.domain_knots.resize(mu.size());
  f.image_values.resize(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const double x = mu.center(0, k);
    f.domain_knots[k] = x;
    f.image_values[k] = quantile(to, from(x));
  }
  return f;
}

}  // namespace otkit
