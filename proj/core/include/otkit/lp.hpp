#pragma once

#include <cstddef>
#include <vector>

#include "otkit/measures.hpp"
#include "otkit/plan.hpp"

namespace otkit {

enum class PivotRule {
  BlockSearch,  // Dantzig pricing over rotating blocks of ~sqrt(arcs) arcs
  Bland,        // first eligible arc in index order
};

/// Plan plus the dual potentials that certify it:
/// cost(i,j) + source_potential[i] - target_potential[j] >= 0 on every pair,
/// with equality on the couplings.
struct LpSolution {
  TransportPlan plan;
  std::vector<double> source_potentials;
  std::vector<double> target_potentials;
};

/// Exact discrete Kantorovich problem by the network (transportation) simplex.
/// The returned plan is a vertex of the transportation polytope.
TransportPlan solve_lp(const DiscreteMeasure& source, const DiscreteMeasure& target,
                       const CostMatrix& cost, PivotRule rule = PivotRule::BlockSearch);
LpSolution solve_lp_with_duals(const DiscreteMeasure& source, const DiscreteMeasure& target,
                               const CostMatrix& cost, PivotRule rule = PivotRule::BlockSearch);

struct MultiscaleConfig {
  std::size_t coarsest_cells = 4;   // stop coarsening below this extent per axis
  std::size_t neighbor_radius = 1;  // coarse cells around each support target
  /// Price every pair against the final duals and re-solve with any violated
  /// pairs added, so the result is optimal for the full problem.
  bool verify_optimality = true;
};

struct MultiscaleLevel {
  std::vector<std::size_t> dims;
  std::size_t arcs = 0;
  std::size_t pivots = 0;
  std::size_t radius = 0;
};

struct MultiscaleStats {
  std::vector<MultiscaleLevel> levels;  // coarsest first
  std::size_t repair_rounds = 0;        // re-solves triggered by the optimality check
};

/// Coarse-to-fine LP on two densities sharing one grid. Densities are
/// coarsened by summing 2^d children; each refinement solves the LP restricted
/// to the children of the previous support and its neighbors.
TransportPlan solve_multiscale(const GridDensity& source, const GridDensity& target, double p,
                               const MultiscaleConfig& config = {},
                               MultiscaleStats* stats = nullptr);

/// Bertsekas auction for the equal-size, equal-mass assignment case. Returns
/// a permutation plan with N couplings of mass 1/N. The last epsilon is below
/// both min_gap / N and 1e-11 * max cost, so the average cost is within
/// 1e-11 * max cost of the optimum.
TransportPlan solve_auction(const DiscreteMeasure& source, const DiscreteMeasure& target,
                            const CostMatrix& cost, bool epsilon_scaling = true);

}  // namespace otkit
