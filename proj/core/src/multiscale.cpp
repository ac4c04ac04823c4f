#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "network_simplex.hpp"
#include "otkit/error.hpp"
#include "otkit/lp.hpp"

namespace otkit {

namespace {

struct Level {
  std::vector<std::size_t> dims;
  std::vector<double> spacing;
  std::vector<double> origin;
  std::vector<double> source;  // cell masses
  std::vector<double> target;

  std::size_t cells() const noexcept { return source.size(); }
};

std::vector<double> cell_masses(const GridDensity& g) {
  std::vector<double> m(g.values);
  double total = 0.0;
  for (double v : m) total += v;
  if (!(total > 0.0)) fail(ErrorCode::AllZero, "density is identically zero");
  for (double& v : m) v /= total;
  return m;
}

Level coarsen(const Level& fine) {
  Level coarse;
  const std::size_t d = fine.dims.size();
  coarse.dims.resize(d);
  coarse.spacing.resize(d);
  coarse.origin.resize(d);
  std::size_t cells = 1;
  for (std::size_t a = 0; a < d; ++a) {
    coarse.dims[a] = fine.dims[a] / 2;
    coarse.spacing[a] = fine.spacing[a] * 2.0;
    coarse.origin[a] = fine.origin[a] + 0.5 * fine.spacing[a];
    cells *= coarse.dims[a];
  }
  coarse.source.assign(cells, 0.0);
  coarse.target.assign(cells, 0.0);
  for (std::size_t k = 0; k < fine.cells(); ++k) {
    std::size_t rest = k;
    std::size_t parent = 0;
    std::size_t stride = 1;
    for (std::size_t a = 0; a < d; ++a) {
      parent += ((rest % fine.dims[a]) / 2) * stride;
      rest /= fine.dims[a];
      stride *= coarse.dims[a];
    }
    coarse.source[parent] += fine.source[k];
    coarse.target[parent] += fine.target[k];
  }
  return coarse;
}

class PairCost {
 public:
  PairCost(const Level& level, double p) : level_(level), p_(p) {}

  double operator()(std::size_t i, std::size_t j) const {
    double sq = 0.0;
    for (std::size_t a = 0; a < level_.dims.size(); ++a) {
      const auto ia = static_cast<double>(i % level_.dims[a]);
      const auto ja = static_cast<double>(j % level_.dims[a]);
      const double diff = (ia - ja) * level_.spacing[a];
      sq += diff * diff;
      i /= level_.dims[a];
      j /= level_.dims[a];
    }
    if (p_ == 2.0) return sq;
    if (p_ == 1.0) return std::sqrt(sq);
    return std::pow(std::sqrt(sq), p_);
  }

 private:
  const Level& level_;
  double p_;
};

// multi-index <-> flat helpers
std::vector<std::size_t> unflatten(std::size_t k, const std::vector<std::size_t>& dims) {
  std::vector<std::size_t> idx(dims.size());
  for (std::size_t a = 0; a < dims.size(); ++a) {
    idx[a] = k % dims[a];
    k /= dims[a];
  }
  return idx;
}

// Flat indices of the cells within Chebyshev distance `radius` of `cell`.
std::vector<std::size_t> neighborhood(std::size_t cell, const std::vector<std::size_t>& dims,
                                      std::size_t radius) {
  const auto center = unflatten(cell, dims);
  std::vector<std::size_t> out{0};
  std::size_t stride = 1;
  for (std::size_t a = 0; a < dims.size(); ++a) {
    const std::size_t lo = center[a] >= radius ? center[a] - radius : 0;
    const std::size_t hi = std::min(dims[a] - 1, center[a] + radius);
    std::vector<std::size_t> next;
    next.reserve(out.size() * (hi - lo + 1));
    for (std::size_t base : out) {
      for (std::size_t c = lo; c <= hi; ++c) next.push_back(base + c * stride);
    }
    out.swap(next);
    stride *= dims[a];
  }
  return out;
}

// The 2^d fine cells covered by a coarse cell.
std::vector<std::size_t> children(std::size_t coarse, const std::vector<std::size_t>& coarse_dims,
                                  const std::vector<std::size_t>& fine_dims) {
  const auto idx = unflatten(coarse, coarse_dims);
  std::vector<std::size_t> out{0};
  std::size_t stride = 1;
  for (std::size_t a = 0; a < fine_dims.size(); ++a) {
    std::vector<std::size_t> next;
    next.reserve(out.size() * 2);
    for (std::size_t base : out) {
      next.push_back(base + (2 * idx[a]) * stride);
      next.push_back(base + (2 * idx[a] + 1) * stride);
    }
    out.swap(next);
    stride *= fine_dims[a];
  }
  return out;
}

detail::SparseArcs make_arcs(std::vector<std::uint64_t>& keys, std::size_t cols,
                             const PairCost& cost) {
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  detail::SparseArcs arcs;
  arcs.sources.reserve(keys.size());
  arcs.targets.reserve(keys.size());
  arcs.costs.reserve(keys.size());
  for (std::uint64_t key : keys) {
    const auto i = static_cast<std::size_t>(key / cols);
    const auto j = static_cast<std::size_t>(key % cols);
    arcs.sources.push_back(static_cast<std::uint32_t>(i));
    arcs.targets.push_back(static_cast<std::uint32_t>(j));
    arcs.costs.push_back(cost(i, j));
  }
  return arcs;
}

struct Support {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

std::vector<std::uint64_t> refine_keys(const Support& support, const Level& coarse,
                                       const Level& fine, std::size_t radius) {
  std::vector<std::uint64_t> keys;
  const std::size_t cols = fine.cells();
  for (const auto& [ci, cj] : support.pairs) {
    const auto rows = children(ci, coarse.dims, fine.dims);
    for (std::size_t nj : neighborhood(cj, coarse.dims, radius)) {
      for (std::size_t fj : children(nj, coarse.dims, fine.dims)) {
        for (std::size_t fi : rows) keys.push_back(static_cast<std::uint64_t>(fi) * cols + fj);
      }
    }
  }
  return keys;
}

}  // namespace

TransportPlan solve_multiscale(const GridDensity& source, const GridDensity& target, double p,
                               const MultiscaleConfig& config, MultiscaleStats* stats) {
  source.validate();
  target.validate();
  if (!(p >= 1.0)) fail(ErrorCode::InvalidOrder, "order p must be >= 1");
  if (source.dims != target.dims) {
    fail(ErrorCode::DimensionMismatch, "multiscale needs both densities on the same grid extents");
  }
  if (config.coarsest_cells < 2) fail(ErrorCode::InvalidArgument, "coarsest_cells must be >= 2");
  if (config.neighbor_radius < 1) fail(ErrorCode::InvalidArgument, "neighbor_radius must be >= 1");

  std::vector<Level> levels;  // finest first while building
  levels.push_back({source.dims, source.spacing, source.origin, cell_masses(source),
                    cell_masses(target)});
  while (true) {
    const Level& last = levels.back();
    bool can_halve = true;
    for (std::size_t extent : last.dims) {
      if (extent % 2 != 0 || extent / 2 < config.coarsest_cells) can_halve = false;
    }
    if (!can_halve) break;
    levels.push_back(coarsen(last));
  }
  std::reverse(levels.begin(), levels.end());
  if (stats) *stats = {};

  // coarsest level: dense LP
  const Level& top = levels.front();
  Support support;
  detail::SimplexResult result;
  std::size_t total_pivots = 0;
  {
    const PairCost cost(top, p);
    std::vector<double> dense(top.cells() * top.cells());
    for (std::size_t i = 0; i < top.cells(); ++i) {
      for (std::size_t j = 0; j < top.cells(); ++j) dense[i * top.cells() + j] = cost(i, j);
    }
    const detail::DenseArcs arcs{top.cells(), top.cells(), dense.data()};
    result = detail::solve_transportation(std::span<const double>(top.source),
                                          std::span<const double>(top.target), arcs);
    if (!result.feasible) fail(ErrorCode::Infeasible, "coarse transport problem is infeasible");
    for (const auto& f : result.flows) support.pairs.emplace_back(arcs.source(f.arc), arcs.target(f.arc));
    total_pivots += result.pivots;
    if (stats) stats->levels.push_back({top.dims, arcs.size(), result.pivots, 0});
  }

  detail::SparseArcs arcs;
  for (std::size_t l = 1; l < levels.size(); ++l) {
    const Level& coarse = levels[l - 1];
    const Level& fine = levels[l];
    const PairCost cost(fine, p);
    std::size_t radius = config.neighbor_radius;
    for (int attempt = 0;; ++attempt) {
      auto keys = refine_keys(support, coarse, fine, radius);
      arcs = make_arcs(keys, fine.cells(), cost);
      result = detail::solve_transportation(std::span<const double>(fine.source),
                                            std::span<const double>(fine.target), arcs);
      total_pivots += result.pivots;
      if (result.feasible) break;
      if (attempt == 1) {
        fail(ErrorCode::RefinementInfeasible,
             "restricted problem infeasible at level " + std::to_string(l) + " with radius " +
                 std::to_string(radius));
      }
      ++radius;
    }
    if (stats) stats->levels.push_back({fine.dims, arcs.size(), result.pivots, radius});
    support.pairs.clear();
    for (const auto& f : result.flows) {
      support.pairs.emplace_back(arcs.source(f.arc), arcs.target(f.arc));
    }
  }

  const Level& finest = levels.back();
  const std::size_t n = finest.cells();
  const PairCost cost(finest, p);
  if (levels.size() > 1 && config.verify_optimality) {
    double max_cost = 0.0;
    for (double c : arcs.costs) max_cost = std::max(max_cost, c);
    for (std::size_t round = 0; round < 32; ++round) {
      const auto& pi = result.potentials;
      double scale = max_cost;
      for (double v : pi) scale = std::max(scale, std::abs(v));
      const double tol = 1e-11 * scale;
      std::vector<std::uint64_t> violated;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (cost(i, j) + pi[i] - pi[n + j] < -tol) {
            violated.push_back(static_cast<std::uint64_t>(i) * n + j);
          }
        }
      }
      if (violated.empty()) break;
      if (stats) ++stats->repair_rounds;
      std::vector<std::uint64_t> keys;
      keys.reserve(arcs.size() + violated.size());
      for (std::size_t a = 0; a < arcs.size(); ++a) {
        keys.push_back(static_cast<std::uint64_t>(arcs.sources[a]) * n + arcs.targets[a]);
      }
      keys.insert(keys.end(), violated.begin(), violated.end());
      arcs = make_arcs(keys, n, cost);
      for (double c : arcs.costs) max_cost = std::max(max_cost, c);
      result = detail::solve_transportation(std::span<const double>(finest.source),
                                            std::span<const double>(finest.target), arcs);
      total_pivots += result.pivots;
    }
  }

  TransportPlan plan;
  plan.source_size = n;
  plan.target_size = n;
  plan.method = "multiscale";
  plan.iterations = total_pivots;
  if (levels.size() == 1) {
    // nothing to refine: the coarsest level is the finest
    for (const auto& f : result.flows) {
      const std::size_t i = f.arc / n;
      const std::size_t j = f.arc % n;
      plan.couplings.push_back({i, j, f.flow});
      plan.total_cost += cost(i, j) * f.flow;
    }
    return plan;
  }
  for (const auto& f : result.flows) {
    const std::size_t i = arcs.sources[f.arc];
    const std::size_t j = arcs.targets[f.arc];
    plan.couplings.push_back({i, j, f.flow});
    plan.total_cost += cost(i, j) * f.flow;
  }
  return plan;
}

}  // namespace otkit
