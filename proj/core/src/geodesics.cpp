#include "otkit/geodesics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "otkit/entropic.hpp"
#include "otkit/error.hpp"
#include "otkit/exact1d.hpp"
#include "otkit/lp.hpp"
#include "otkit/parallel.hpp"

namespace otkit {

DiscreteMeasure interpolate(const TransportPlan& plan, const DiscreteMeasure& source,
                            const DiscreteMeasure& target, double t) {
  if (!(t >= 0.0 && t <= 1.0)) fail(ErrorCode::RangeError, "t must lie in [0, 1]");
  if (source.dim() != target.dim()) {
    fail(ErrorCode::DimensionMismatch, "source and target live in different dimensions");
  }
  if (plan.source_size != source.size() || plan.target_size != target.size()) {
    fail(ErrorCode::PlanMismatch, "plan is " + std::to_string(plan.source_size) + "x" +
                                      std::to_string(plan.target_size) + " but the measures have " +
                                      std::to_string(source.size()) + " and " +
                                      std::to_string(target.size()) + " atoms");
  }
  for (const auto& c : plan.couplings) {
    if (c.source >= source.size() || c.target >= target.size() || !(c.mass >= 0.0)) {
      fail(ErrorCode::PlanMismatch, "plan has an invalid coupling");
    }
  }
  const double tol = 1e-8 * std::max(1.0, source.total_mass());
  if (marginal_error(plan, source, target) > tol) {
    fail(ErrorCode::PlanMismatch, "plan marginals do not match the measures");
  }

  const std::size_t d = source.dim();
  struct Atom {
    std::vector<double> x;
    double mass;
    std::size_t order;
  };
  std::vector<Atom> atoms;
  atoms.reserve(plan.couplings.size());
  for (const auto& c : plan.couplings) {
    if (c.mass <= 0.0) continue;
    const auto x = source.point(c.source);
    const auto y = target.point(c.target);
    std::vector<double> z(d);
    for (std::size_t a = 0; a < d; ++a) {
      // exact at both ends, so t = 0 and t = 1 reproduce the endpoints
      z[a] = t == 0.0 ? x[a] : t == 1.0 ? y[a] : (1.0 - t) * x[a] + t * y[a];
    }
    atoms.push_back({std::move(z), c.mass, atoms.size()});
  }
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
    return a.x != b.x ? a.x < b.x : a.order < b.order;
  });
  std::vector<Atom> merged;
  for (auto& a : atoms) {
    if (!merged.empty() && merged.back().x == a.x) {
      merged.back().mass += a.mass;
    } else {
      merged.push_back(std::move(a));
    }
  }
  std::sort(merged.begin(), merged.end(),
            [](const Atom& a, const Atom& b) { return a.order < b.order; });
  std::vector<double> coords;
  std::vector<double> weights;
  coords.reserve(merged.size() * d);
  weights.reserve(merged.size());
  for (const auto& a : merged) {
    coords.insert(coords.end(), a.x.begin(), a.x.end());
    weights.push_back(a.mass);
  }
  return DiscreteMeasure(d, std::move(coords), std::move(weights));
}

GridDensity render(const DiscreteMeasure& measure, const GridDensity& grid) {
  grid.validate();
  const std::size_t d = grid.dimension();
  if (measure.dim() != d) {
    fail(ErrorCode::DimensionMismatch, "measure dimension does not match the grid");
  }
  GridDensity out = grid;
  std::fill(out.values.begin(), out.values.end(), 0.0);
  std::vector<std::size_t> clipped;
  std::vector<std::size_t> lower(d);
  std::vector<double> frac(d);
  for (std::size_t i = 0; i < measure.size(); ++i) {
    const auto x = measure.point(i);
    bool inside = true;
    for (std::size_t a = 0; a < d; ++a) {
      const auto n = static_cast<double>(grid.dims[a]);
      double u = (x[a] - grid.origin[a]) / grid.spacing[a];
      if (u < -0.5 - 1e-9 || u > n - 0.5 + 1e-9) {
        inside = false;
        break;
      }
      const double snapped = std::round(u);
      if (std::abs(u - snapped) < 1e-9) u = snapped;
      u = std::clamp(u, 0.0, n - 1.0);
      auto lo = static_cast<std::size_t>(std::floor(u));
      double fr = u - static_cast<double>(lo);
      if (lo + 1 >= grid.dims[a]) {
        lo = grid.dims[a] - 1;
        fr = 0.0;
      }
      lower[a] = lo;
      frac[a] = fr;
    }
    if (!inside) {
      clipped.push_back(i);
      continue;
    }
    const double mass = measure.weight(i);
    for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
      double w = mass;
      std::size_t flat = 0;
      std::size_t stride = 1;
      for (std::size_t a = 0; a < d; ++a) {
        const bool up = (corner >> a) & 1U;
        w *= up ? frac[a] : 1.0 - frac[a];
        flat += (lower[a] + (up ? 1 : 0)) * stride;
        stride *= grid.dims[a];
      }
      if (w != 0.0) out.values[flat] += w;
    }
  }
  if (!clipped.empty()) {
    std::string list;
    for (std::size_t k = 0; k < std::min<std::size_t>(clipped.size(), 10); ++k) {
      list += (k ? ", " : "") + std::to_string(clipped[k]);
    }
    if (clipped.size() > 10) list += ", ...";
    fail(ErrorCode::OutOfBounds,
         std::to_string(clipped.size()) + " atom(s) outside the grid: " + list);
  }
  const double volume = grid.cell_volume();
  for (double& v : out.values) v /= volume;
  return out;
}

DiscreteMeasure grid_atoms(const GridDensity& density, std::size_t max_atoms) {
  density.validate();
  std::vector<std::size_t> cells;
  for (std::size_t k = 0; k < density.size(); ++k) {
    if (density.values[k] > 0.0) cells.push_back(k);
  }
  if (cells.empty()) fail(ErrorCode::AllZero, "density is identically zero");
  if (max_atoms == 0) fail(ErrorCode::InvalidArgument, "max_atoms must be positive");
  if (cells.size() > max_atoms) {
    std::stable_sort(cells.begin(), cells.end(), [&](std::size_t a, std::size_t b) {
      return density.values[a] > density.values[b];
    });
    cells.resize(max_atoms);
    std::sort(cells.begin(), cells.end());
  }
  const std::size_t d = density.dimension();
  std::vector<double> coords;
  std::vector<double> weights;
  coords.reserve(cells.size() * d);
  for (std::size_t k : cells) {
    const auto c = density.center_of(k);
    coords.insert(coords.end(), c.begin(), c.end());
    weights.push_back(density.values[k]);
  }
  return DiscreteMeasure(d, std::move(coords), std::move(weights)).normalized();
}

GeodesicPath morph(const GridDensity& source, const GridDensity& target, std::size_t n_frames,
                   const MorphOptions& options) {
  source.validate();
  target.validate();
  if (!source.same_grid(target)) {
    fail(ErrorCode::DimensionMismatch, "source and target must share one grid");
  }
  if (n_frames < 2) fail(ErrorCode::InvalidArgument, "morph needs at least 2 frames");
  const std::size_t d = source.dimension();
  const bool one_d = d == 1;
  const std::size_t cap = one_d ? std::numeric_limits<std::size_t>::max() : options.max_atoms;

  GeodesicPath path;
  path.source = grid_atoms(source, cap);
  path.target = grid_atoms(target, cap);
  MorphSolver solver = options.solver;
  if (one_d && !options.force_solver) solver = MorphSolver::Exact1d;
  switch (solver) {
    case MorphSolver::Exact1d:
      if (!one_d) fail(ErrorCode::InvalidArgument, "the exact1d solver needs 1-D inputs");
      path.plan = monotone_plan_1d(path.source, path.target, 2.0);
      path.solver = "exact1d";
      break;
    case MorphSolver::Lp: {
      const CostMatrix cost = cost_matrix(path.source, path.target, 2.0);
      path.plan = solve_lp(path.source, path.target, cost);
      path.solver = "lp";
      break;
    }
    case MorphSolver::Entropic: {
      if (!(options.rel_lambda > 0.0)) fail(ErrorCode::InvalidArgument, "rel_lambda must be positive");
      const CostMatrix cost = cost_matrix(path.source, path.target, 2.0);
      path.plan = sinkhorn_solve(path.source, path.target, cost,
                                 options.rel_lambda * std::max(cost.max(), 1e-300))
                      .plan;
      path.solver = "sinkhorn";
      break;
    }
  }
  path.samples.resize(n_frames);
  parallel_for(
      n_frames,
      [&](std::size_t k) {
        GeodesicFrame& frame = path.samples[k];
        frame.t = static_cast<double>(k) / static_cast<double>(n_frames - 1);
        frame.measure = interpolate(path.plan, path.source, path.target, frame.t);
        frame.density = render(frame.measure, source);
      },
      path.plan.couplings.size());
  return path;
}

std::vector<double> transfer_1d(const GridDensity& source_hist, const GridDensity& target_hist,
                                const std::vector<double>& values, Dequantize mode) {
  for (const GridDensity* g : {&source_hist, &target_hist}) {
    g->validate();
    if (g->dimension() != 1) fail(ErrorCode::DimensionError, "histograms must be one-dimensional");
  }
  const Cdf from = cdf(source_hist);
  const Cdf to = cdf(target_hist);
  const double h = source_hist.spacing[0];
  const std::size_t n = source_hist.size();
  const double left = source_hist.origin[0] - 0.5 * h;
  const double right = left + h * static_cast<double>(n);
  std::vector<std::size_t> cell(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!(v >= left && v <= right)) {
      fail(ErrorCode::RangeError, "value " + std::to_string(v) + " at index " + std::to_string(i) +
                                      " is outside the histogram range [" + std::to_string(left) +
                                      ", " + std::to_string(right) + "]");
    }
    cell[i] = std::min(n - 1, static_cast<std::size_t>((v - left) / h));
  }
  std::vector<double> positions(values);
  if (mode == Dequantize::Spread) {
    std::vector<std::size_t> count(n, 0);
    for (std::size_t c : cell) ++count[c];
    std::vector<std::size_t> seen(n, 0);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const std::size_t c = cell[i];
      const double offset = (static_cast<double>(seen[c]++) + 0.5) / static_cast<double>(count[c]);
      positions[i] = left + h * (static_cast<double>(c) + offset);
    }
  }
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = transport_map_value(from, to, positions[i]);
  return out;
}

GridDensity gray_histogram(const std::vector<double>& values) {
  if (values.empty()) fail(ErrorCode::InvalidArgument, "no values to histogram");
  std::vector<double> counts(256, 0.0);
  for (double v : values) {
    const double r = std::round(v);
    if (!(r >= 0.0 && r <= 255.0)) {
      fail(ErrorCode::RangeError, "value " + std::to_string(v) + " outside [0, 255]");
    }
    counts[static_cast<std::size_t>(r)] += 1.0;
  }
  for (double& c : counts) c /= static_cast<double>(values.size());
  return GridDensity::line(std::move(counts), 1.0, 0.0);
}

namespace {

using Vec3 = std::array<double, 3>;

std::vector<double> to_cloud(const RgbImage& img) {
  if (img.pixels.size() != 3 * img.size() || img.size() == 0) {
    fail(ErrorCode::FormatError, "RGB image holds " + std::to_string(img.pixels.size()) +
                                     " bytes for " + std::to_string(img.width) + "x" +
                                     std::to_string(img.height) + " pixels");
  }
  return {img.pixels.begin(), img.pixels.end()};
}

std::vector<Vec3> random_directions(std::mt19937_64& rng, std::size_t count) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vec3> dirs;
  while (dirs.size() < count) {
    // one random orthonormal frame per triple
    std::array<Vec3, 3> frame{};
    std::size_t k = 0;
    while (k < 3) {
      Vec3 v{normal(rng), normal(rng), normal(rng)};
      for (std::size_t j = 0; j < k; ++j) {
        const double c = v[0] * frame[j][0] + v[1] * frame[j][1] + v[2] * frame[j][2];
        for (std::size_t a = 0; a < 3; ++a) v[a] -= c * frame[j][a];
      }
      const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
      if (norm < 1e-6) continue;
      // orient toward increasing luminance so that theta and -theta, which
      // describe the same slice, break rank ties the same way
      const double sign = v[0] + v[1] + v[2] < 0.0 ? -1.0 : 1.0;
      for (double& x : v) x *= sign / norm;
      frame[k++] = v;
    }
    for (std::size_t j = 0; j < 3 && dirs.size() < count; ++j) dirs.push_back(frame[j]);
  }
  return dirs;
}

// Displacement along theta that sends the projected source onto the
// projected target: the source value of ordinal rank r (ties in index order)
// moves to the target pseudoinverse at z = (r + 1/2) / n.
std::vector<double> slice_displacement(const std::vector<double>& x, const std::vector<double>& y,
                                       const Vec3& theta) {
  const std::size_t n = x.size() / 3;
  const std::size_t m = y.size() / 3;
  std::vector<double> s(n);
  std::vector<double> t(m);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = x[3 * i] * theta[0] + x[3 * i + 1] * theta[1] + x[3 * i + 2] * theta[2];
  }
  for (std::size_t j = 0; j < m; ++j) {
    t[j] = y[3 * j] * theta[0] + y[3 * j + 1] * theta[1] + y[3 * j + 2] * theta[2];
  }
  std::sort(t.begin(), t.end());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] < s[b]; });
  std::vector<double> d(n);
  for (std::size_t r = 0; r < n; ++r) {
    // smallest j with (j + 1) / m >= (2r + 1) / 2n, in integers
    const std::uint64_t num = (2 * static_cast<std::uint64_t>(r) + 1) * m;
    const std::uint64_t den = 2 * static_cast<std::uint64_t>(n);
    const auto j = static_cast<std::size_t>((num + den - 1) / den - 1);
    d[order[r]] = t[std::min(j, m - 1)] - s[order[r]];
  }
  return d;
}

void box_smooth(std::vector<double>& field, std::size_t width, std::size_t height,
                std::size_t radius) {
  std::vector<double> tmp(field.size());
  const auto r = static_cast<std::ptrdiff_t>(radius);
  const auto w = static_cast<std::ptrdiff_t>(width);
  const auto h = static_cast<std::ptrdiff_t>(height);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::ptrdiff_t y = 0; y < h; ++y) {
      for (std::ptrdiff_t x = 0; x < w; ++x) {
        double sum = 0.0;
        std::ptrdiff_t count = 0;
        for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(0, x - r); k <= std::min(w - 1, x + r); ++k) {
          sum += field[3 * static_cast<std::size_t>(y * w + k) + c];
          ++count;
        }
        tmp[3 * static_cast<std::size_t>(y * w + x) + c] = sum / static_cast<double>(count);
      }
    }
    for (std::ptrdiff_t y = 0; y < h; ++y) {
      for (std::ptrdiff_t x = 0; x < w; ++x) {
        double sum = 0.0;
        std::ptrdiff_t count = 0;
        for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(0, y - r); k <= std::min(h - 1, y + r); ++k) {
          sum += tmp[3 * static_cast<std::size_t>(k * w + x) + c];
          ++count;
        }
        field[3 * static_cast<std::size_t>(y * w + x) + c] = sum / static_cast<double>(count);
      }
    }
  }
}

}  // namespace

std::vector<std::vector<double>> transfer_color_trace(const RgbImage& source,
                                                      const RgbImage& target,
                                                      const ColorTransferOptions& options) {
  if (options.n_directions == 0) fail(ErrorCode::InvalidArgument, "n_directions must be positive");
  std::vector<double> x = to_cloud(source);
  const std::vector<double> y = to_cloud(target);
  std::mt19937_64 rng(options.seed);
  const double scale = 3.0 / static_cast<double>(options.n_directions);
  std::vector<std::vector<double>> trace{x};
  for (std::size_t sweep = 0; sweep < options.n_sweeps; ++sweep) {
    const auto dirs = random_directions(rng, options.n_directions);
    std::vector<std::vector<double>> moves(dirs.size());
    parallel_for(
        dirs.size(), [&](std::size_t k) { moves[k] = slice_displacement(x, y, dirs[k]); },
        x.size());
    std::vector<double> field(x.size(), 0.0);
    for (std::size_t k = 0; k < dirs.size(); ++k) {
      for (std::size_t i = 0; i < moves[k].size(); ++i) {
        for (std::size_t a = 0; a < 3; ++a) field[3 * i + a] += moves[k][i] * dirs[k][a];
      }
    }
    if (options.smooth && options.smooth_radius > 0) {
      box_smooth(field, source.width, source.height, options.smooth_radius);
    }
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += scale * field[i];
    trace.push_back(x);
  }
  return trace;
}

RgbImage transfer_color(const RgbImage& source, const RgbImage& target,
                        const ColorTransferOptions& options) {
  const auto trace = transfer_color_trace(source, target, options);
  RgbImage out{source.width, source.height, std::vector<std::uint8_t>(source.pixels.size())};
  const auto& x = trace.back();
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(x[i], 0.0, 255.0)));
  }
  return out;
}

}  // namespace otkit
