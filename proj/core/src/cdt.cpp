#include "otkit/cdt.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "otkit/entropic.hpp"
#include "otkit/error.hpp"
#include "otkit/lp.hpp"
#include "otkit/parallel.hpp"

namespace otkit {

namespace {

// Fritsch-Carlson monotone piecewise-cubic Hermite interpolant.
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)), d_(x_.size(), 0.0) {
    const std::size_t n = x_.size();
    if (n < 2) return;
    std::vector<double> step(n - 1);
    std::vector<double> slope(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      step[k] = x_[k + 1] - x_[k];
      slope[k] = (y_[k + 1] - y_[k]) / step[k];
    }
    if (n == 2) {
      d_[0] = d_[1] = slope[0];
      return;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (slope[k - 1] * slope[k] <= 0.0) continue;
      const double w1 = 2.0 * step[k] + step[k - 1];
      const double w2 = step[k] + 2.0 * step[k - 1];
      d_[k] = (w1 + w2) / (w1 / slope[k - 1] + w2 / slope[k]);
    }
    d_[0] = end_slope(step[0], step[1], slope[0], slope[1]);
    d_[n - 1] = end_slope(step[n - 2], step[n - 3], slope[n - 2], slope[n - 3]);
  }

  double operator()(double x) const {
    const std::size_t n = x_.size();
    if (n == 1) return y_[0];
    std::size_t k = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
    k = std::clamp<std::size_t>(k, 1, n - 1) - 1;
    const double h = x_[k + 1] - x_[k];
    const double t = (x - x_[k]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2.0 * t3 - 3.0 * t2 + 1.0) * y_[k] + (t3 - 2.0 * t2 + t) * h * d_[k] +
           (-2.0 * t3 + 3.0 * t2) * y_[k + 1] + (t3 - t2) * h * d_[k + 1];
  }

 private:
  static double end_slope(double h0, double h1, double s0, double s1) {
    double d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if (d * s0 <= 0.0) return 0.0;
    if (s0 * s1 <= 0.0 && std::abs(d) > std::abs(3.0 * s0)) return 3.0 * s0;
    return d;
  }

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> d_;
};

void require_line(const GridDensity& g) {
  g.validate();
  if (g.dimension() != 1) fail(ErrorCode::DimensionError, "expected a one-dimensional density");
}

bool same_reference(const GridDensity& a, const GridDensity& b) {
  if (!a.same_grid(b)) return false;
  const double scale = std::max(a.max_value(), b.max_value());
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::abs(a.values[k] - b.values[k]) > 1e-12 * scale) return false;
  }
  return true;
}

}  // namespace

GridDensity cdt_prepare(const GridDensity& raw, double eps_rel) {
  if (!(eps_rel >= 0.0)) fail(ErrorCode::RangeError, "eps_rel must be nonnegative");
  return normalize(raw, eps_rel * raw.max_value());
}

CdtSignal cdt_forward(const GridDensity& signal, const GridDensity& reference) {
  require_line(signal);
  require_line(reference);
  if (!signal.same_grid(reference)) {
    fail(ErrorCode::DimensionMismatch, "signal and reference must share one grid");
  }
  CdtSignal out;
  out.reference = normalize(reference, 0.0);
  const GridDensity target = normalize(signal, 0.0);
  const MonotoneMap1D f = optimal_map_1d(out.reference, target);
  out.values.resize(f.domain_knots.size());
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    out.values[k] = (f.image_values[k] - f.domain_knots[k]) * std::sqrt(out.reference.values[k]);
  }
  return out;
}

MonotoneMap1D cdt_map(const CdtSignal& transformed) {
  const GridDensity& ref = transformed.reference;
  require_line(ref);
  if (transformed.values.size() != ref.size()) {
    fail(ErrorCode::DimensionMismatch, "transform has " + std::to_string(transformed.values.size()) +
                                           " values for " + std::to_string(ref.size()) + " cells");
  }
  MonotoneMap1D f;
  f.domain_knots.resize(ref.size());
  f.image_values.resize(ref.size());
  for (std::size_t k = 0; k < ref.size(); ++k) {
    if (!(ref.values[k] > 0.0)) {
      fail(ErrorCode::ZeroDensity, "reference cell " + std::to_string(k) + " is not positive");
    }
    f.domain_knots[k] = ref.center(0, k);
    f.image_values[k] = f.domain_knots[k] + transformed.values[k] / std::sqrt(ref.values[k]);
  }
  return f;
}

namespace {

// The forward map is exact for the piecewise-linear grid CDFs, so each knot
// gives F_s(f(x_k)) = F_0(x_k) with F_s linear inside the cell holding f(x_k):
// one equation in two neighboring edge values. Least squares over all knots,
// plus a weak pull toward `edge_cdf` for edges no knot pins down, is a
// tridiagonal solve and reproduces the signal up to rounding.
void refine_edge_cdf(const GridDensity& ref, const MonotoneMap1D& f, const Cdf& f0,
                     std::vector<double>& edge_cdf) {
  constexpr double kPrior = 1e-10;
  const std::size_t n = ref.size();
  const double h = ref.spacing[0];
  const double left = ref.origin[0] - 0.5 * h;
  std::vector<double> diag(n + 1, kPrior);
  std::vector<double> upper(n, 0.0);  // (m, m + 1)
  std::vector<double> rhs(n + 1);
  for (std::size_t m = 0; m <= n; ++m) rhs[m] = kPrior * edge_cdf[m];
  diag[0] += 1.0;  // F_s(left edge) = 0
  diag[n] += 1.0;  // F_s(right edge) = 1
  rhs[n] += 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double u = (f.image_values[k] - left) / h;
    if (!(u >= 0.0 && u <= static_cast<double>(n))) continue;
    const auto m = std::min(static_cast<std::size_t>(u), n - 1);
    const double a = u - static_cast<double>(m);
    const double z = f0(f.domain_knots[k]);
    diag[m] += (1.0 - a) * (1.0 - a);
    diag[m + 1] += a * a;
    upper[m] += a * (1.0 - a);
    rhs[m] += (1.0 - a) * z;
    rhs[m + 1] += a * z;
  }
  // Thomas algorithm; the normal matrix is symmetric positive definite
  for (std::size_t m = 1; m <= n; ++m) {
    const double w = upper[m - 1] / diag[m - 1];
    diag[m] -= w * upper[m - 1];
    rhs[m] -= w * rhs[m - 1];
  }
  edge_cdf[n] = rhs[n] / diag[n];
  for (std::size_t m = n; m-- > 0;) edge_cdf[m] = (rhs[m] - upper[m] * edge_cdf[m + 1]) / diag[m];
}

}  // namespace

GridDensity cdt_inverse(const CdtSignal& transformed) {
  const MonotoneMap1D f = cdt_map(transformed);
  const auto& ys = f.image_values;
  double scale = 0.0;
  for (double y : ys) scale = std::max(scale, std::abs(y));
  for (std::size_t k = 1; k < ys.size(); ++k) {
    if (ys[k] < ys[k - 1] - 1e-12 * scale) {
      fail(ErrorCode::NonMonotoneMap, "recovered map decreases between cells " +
                                          std::to_string(k - 1) + " and " + std::to_string(k));
    }
  }
  const GridDensity& ref = transformed.reference;
  const Cdf f0 = cdf(ref);
  // F_signal(y) = F_0(f^-1(y)). A monotone cubic through (f(x_k), x_k)
  // stands in for f^-1 and resolves low-density stretches of the signal
  // where f jumps between neighboring knots; affine maps come out exact.
  std::vector<double> knot_y;
  std::vector<double> knot_x;
  for (std::size_t k = 0; k < ys.size(); ++k) {
    if (!knot_y.empty() && ys[k] <= knot_y.back()) {
      knot_x.back() = f.domain_knots[k];
      continue;
    }
    knot_y.push_back(ys[k]);
    knot_x.push_back(f.domain_knots[k]);
  }
  const MonotoneCubic inverse_map(knot_y, knot_x);
  const double h = ref.spacing[0];
  const std::size_t n = ref.size();
  std::vector<double> at_edge(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double edge = ref.origin[0] + h * (static_cast<double>(k) - 0.5);
    if (knot_y.size() >= 2 && edge >= knot_y.front() && edge <= knot_y.back()) {
      at_edge[k] = f0(inverse_map(edge));
    } else {
      at_edge[k] = f0(f.inverse(edge));
    }
  }
  refine_edge_cdf(ref, f, f0, at_edge);
  GridDensity out = ref;
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = std::max(0.0, at_edge[k + 1] - at_edge[k]) / h;
    total += out.values[k] * h;
  }
  if (!(total > 0.0)) fail(ErrorCode::AllZero, "recovered density has no mass on the grid");
  for (double& v : out.values) v /= total;
  return out;
}

double cdt_distance(const CdtSignal& a, const CdtSignal& b) {
  if (!same_reference(a.reference, b.reference) || a.values.size() != b.values.size()) {
    fail(ErrorCode::ReferenceMismatch, "CDT signals were computed against different references");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    const double d = a.values[k] - b.values[k];
    sum += d * d;
  }
  return std::sqrt(sum * a.reference.spacing[0]);
}

RadonCdtImage radon_cdt_forward(const GridDensity& image, const GridDensity& templ,
                                std::size_t n_angles, double eps_rel) {
  if (!image.same_grid(templ)) {
    fail(ErrorCode::DimensionMismatch, "image and template must share one grid");
  }
  const Sinogram si = radon(image, n_angles);
  const Sinogram st = radon(templ, n_angles);
  RadonCdtImage out;
  out.reference_sinogram.angles = st.angles;
  out.reference_sinogram.profiles.resize(n_angles);
  out.values.resize(n_angles);
  parallel_for(
      n_angles,
      [&](std::size_t k) {
        const GridDensity ref = cdt_prepare(st.profiles[k], eps_rel);
        out.values[k] = cdt_forward(cdt_prepare(si.profiles[k], eps_rel), ref);
        out.reference_sinogram.profiles[k] = out.values[k].reference;
      },
      si.profiles.front().size());
  return out;
}

Sinogram radon_cdt_inverse(const RadonCdtImage& transformed) {
  Sinogram out;
  out.angles = transformed.reference_sinogram.angles;
  out.profiles.resize(transformed.values.size());
  for (std::size_t k = 0; k < transformed.values.size(); ++k) {
    out.profiles[k] = cdt_inverse(transformed.values[k]);
  }
  return out;
}

double radon_cdt_distance(const RadonCdtImage& a, const RadonCdtImage& b) {
  if (a.values.size() != b.values.size() || a.values.empty()) {
    fail(ErrorCode::ReferenceMismatch, "Radon-CDT images have different angle sets");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    const double d = cdt_distance(a.values[k], b.values[k]);
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(a.values.size()));
}

GridDensity average_reference(const std::vector<GridDensity>& inputs) {
  if (inputs.empty()) fail(ErrorCode::InvalidArgument, "average of an empty set");
  GridDensity out = normalize(inputs.front(), 0.0);
  for (std::size_t s = 1; s < inputs.size(); ++s) {
    if (!inputs[s].same_grid(out)) {
      fail(ErrorCode::DimensionMismatch, "input " + std::to_string(s) + " is on a different grid");
    }
    const GridDensity g = normalize(inputs[s], 0.0);
    for (std::size_t k = 0; k < out.size(); ++k) out.values[k] += g.values[k];
  }
  return normalize(out, 0.0);
}

namespace {

// Affine hull of a set of sampled maps, orthonormalized once so that
// membership is a projection.
class AffineHull {
 public:
  AffineHull(const std::vector<std::vector<double>>& members) : anchor_(members.front()) {
    double scale = 0.0;
    for (const auto& m : members) {
      for (double v : m) scale = std::max(scale, std::abs(v));
    }
    for (std::size_t s = 1; s < members.size(); ++s) {
      std::vector<double> d(anchor_.size());
      for (std::size_t k = 0; k < d.size(); ++k) d[k] = members[s][k] - anchor_[k];
      project_out(d);
      const double norm = std::sqrt(dot(d, d));
      if (norm > 1e-10 * std::max(scale, 1.0) * std::sqrt(static_cast<double>(d.size()))) {
        for (double& v : d) v /= norm;
        basis_.push_back(std::move(d));
      }
    }
  }

  /// RMS distance from g to the hull.
  double residual(const std::vector<double>& g) const {
    std::vector<double> r(g.size());
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = g[k] - anchor_[k];
    project_out(r);
    project_out(r);  // second pass for numerical orthogonality
    return std::sqrt(dot(r, r) / static_cast<double>(r.size()));
  }

 private:
  static double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
  }
  void project_out(std::vector<double>& v) const {
    for (const auto& e : basis_) {
      const double c = dot(v, e);
      for (std::size_t k = 0; k < v.size(); ++k) v[k] -= c * e[k];
    }
  }

  std::vector<double> anchor_;
  std::vector<std::vector<double>> basis_;
};

double rms(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

struct Family {
  std::vector<double> knots;  // interior knots used for membership
  AffineHull hull;
  double tol;

  bool contains(const std::vector<double>& g, double& residual) const {
    residual = hull.residual(g);
    return residual <= tol * (1.0 + rms(g));
  }
};

void check_common_knots(const std::vector<MonotoneMap1D>& maps) {
  if (maps.empty()) fail(ErrorCode::InvalidArgument, "empty map family");
  const auto& knots = maps.front().domain_knots;
  if (knots.empty()) fail(ErrorCode::InvalidArgument, "maps have no knots");
  for (const auto& m : maps) {
    if (m.domain_knots != knots || m.image_values.size() != knots.size()) {
      fail(ErrorCode::DimensionMismatch, "maps must be sampled on a common grid");
    }
  }
  // the composition and inverse conditions assume strictly increasing maps
  for (std::size_t a = 0; a < maps.size(); ++a) {
    const auto& v = maps[a].image_values;
    for (std::size_t k = 1; k < v.size(); ++k) {
      if (!(v[k] > v[k - 1])) {
        fail(ErrorCode::InvalidArgument, "map " + std::to_string(a) +
                                             " is not strictly increasing at knot " + std::to_string(k));
      }
    }
  }
}

Family family_on(const std::vector<MonotoneMap1D>& maps, std::vector<double> knots, double tol) {
  std::vector<std::vector<double>> members;
  for (const auto& m : maps) {
    std::vector<double> v(knots.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = m(knots[k]);
    members.push_back(std::move(v));
  }
  AffineHull hull(members);
  return Family{std::move(knots), std::move(hull), tol};
}

Family make_family(const std::vector<MonotoneMap1D>& maps, double tol, double margin) {
  check_common_knots(maps);
  if (!(margin >= 0.0 && margin < 0.5)) fail(ErrorCode::RangeError, "margin must be in [0, 0.5)");
  const auto& knots = maps.front().domain_knots;
  const auto skip = static_cast<std::size_t>(margin * static_cast<double>(knots.size()));
  std::vector<double> interior(knots.begin() + static_cast<std::ptrdiff_t>(skip),
                               knots.end() - static_cast<std::ptrdiff_t>(skip));
  if (interior.empty()) interior = knots;
  return family_on(maps, std::move(interior), tol);
}

std::vector<double> sample(const std::vector<double>& knots, const std::function<double(double)>& g) {
  std::vector<double> v(knots.size());
  for (std::size_t k = 0; k < knots.size(); ++k) v[k] = g(knots[k]);
  return v;
}

}  // namespace

SeparabilityReport check_separability_conditions(const std::vector<MonotoneMap1D>& maps,
                                                 double tol, double margin) {
  const Family family = make_family(maps, tol, margin);
  SeparabilityReport report;
  auto record = [&](const char* condition, bool& flag, std::size_t a, std::size_t b,
                    const std::vector<double>& g, const std::string& detail) {
    double residual = 0.0;
    if (!family.contains(g, residual)) {
      flag = false;
      report.violations.push_back({condition, a, b, residual, detail});
    }
  };
  const std::size_t n = maps.size();
  for (std::size_t a = 0; a < n; ++a) {
    record("inverse", report.inverse_closed, a, a,
           sample(family.knots, [&](double x) { return maps[a].inverse(x); }),
           "inverse of map " + std::to_string(a) + " is outside the family");
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      for (double rho : {0.25, 0.5, 0.75}) {
        record("convex", report.convex_closed, a, b,
               sample(family.knots,
                      [&](double x) { return rho * maps[a](x) + (1.0 - rho) * maps[b](x); }),
               "combination " + std::to_string(rho) + " of maps " + std::to_string(a) + " and " +
                   std::to_string(b) + " is outside the family");
      }
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      record("composition", report.composition_closed, a, b,
             sample(family.knots, [&](double x) { return maps[a](maps[b](x)); }),
             "map " + std::to_string(a) + " after map " + std::to_string(b) +
                 " is outside the family");
    }
  }
  return report;
}

SeparabilityReport check_separability_conditions(const std::vector<MonotoneMap1D>& maps,
                                                 const GridDensity& mother_p,
                                                 const GridDensity& mother_q, double tol,
                                                 double margin) {
  SeparabilityReport report = check_separability_conditions(maps, tol, margin);
  require_line(mother_p);
  require_line(mother_q);
  // h'(p0 o h) = q0 has exactly one monotone solution, h = F_p0^-1 o F_q0;
  // the classes collide iff that map belongs to the family. h is only pinned
  // down where q0 has mass, so the test uses the knots inside its central
  // quantile range [margin, 1 - margin].
  const Cdf fp = cdf(mother_p);
  const Cdf fq = cdf(mother_q);
  std::vector<double> knots;
  for (double x : maps.front().domain_knots) {
    const double z = fq(x);
    if (z >= margin && z <= 1.0 - margin) knots.push_back(x);
  }
  if (knots.empty()) fail(ErrorCode::InvalidArgument, "no family knot lies inside the bulk of q0");
  const Family family = family_on(maps, std::move(knots), tol);
  const auto h = sample(family.knots, [&](double x) { return transport_map_value(fq, fp, x); });
  double residual = 0.0;
  if (family.contains(h, residual)) {
    report.densities_distinct = false;
    report.violations.push_back(
        {"density", 0, 0, residual, "q0 is the pushforward of p0 under a member of the family"});
  }
  return report;
}

std::vector<std::vector<double>> lot_embed(const std::vector<GridDensity>& targets,
                                           const GridDensity& templ, const LotOptions& options) {
  templ.validate();
  std::vector<std::vector<double>> out(targets.size());
  if (templ.dimension() == 1) {
    const double root_h = std::sqrt(templ.spacing[0]);
    for (std::size_t s = 0; s < targets.size(); ++s) {
      CdtSignal c = cdt_forward(targets[s], templ);
      for (double& v : c.values) v *= root_h;
      out[s] = std::move(c.values);
    }
    return out;
  }
  if (templ.dimension() != 2) fail(ErrorCode::DimensionError, "LOT embedding supports d = 1 or 2");

  std::vector<std::size_t> kept;
  const DiscreteMeasure base = to_measure(templ, true).normalized().without_zeros(&kept);
  const std::size_t m = base.size();

  auto embed = [&](const GridDensity& target) {
    if (target.dimension() != 2) fail(ErrorCode::DimensionMismatch, "target is not 2-D");
    const DiscreteMeasure nu = to_measure(target).normalized();
    const CostMatrix cost = cost_matrix(base, nu, 2.0);
    TransportPlan plan;
    if (options.solver == LotSolver::Lp) {
      plan = solve_lp(base, nu, cost);
    } else {
      if (!(options.rel_lambda > 0.0)) fail(ErrorCode::InvalidArgument, "rel_lambda must be positive");
      plan = sinkhorn_solve(base, nu, cost, options.rel_lambda * std::max(cost.max(), 1e-300)).plan;
    }
    std::vector<double> v(2 * m, 0.0);
    for (const auto& c : plan.couplings) {
      const auto x = base.point(c.source);
      const auto y = nu.point(c.target);
      v[2 * c.source] += c.mass * (y[0] - x[0]);
      v[2 * c.source + 1] += c.mass * (y[1] - x[1]);
    }
    for (std::size_t i = 0; i < m; ++i) {
      // gamma_ij / p_i averages; sqrt(p_i) weights the norm by template mass
      const double scale = 1.0 / std::sqrt(base.weight(i));
      v[2 * i] *= scale;
      v[2 * i + 1] *= scale;
    }
    return v;
  };

  parallel_for(targets.size(), [&](std::size_t s) { out[s] = embed(targets[s]); }, m * m);
  if (options.solver == LotSolver::Entropic) {
    const auto self = embed(templ);
    for (auto& v : out) {
      for (std::size_t k = 0; k < v.size(); ++k) v[k] -= self[k];
    }
  }
  return out;
}

double lot_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) fail(ErrorCode::DimensionMismatch, "embeddings differ in length");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

}  // namespace otkit
