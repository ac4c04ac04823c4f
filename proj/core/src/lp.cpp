#include "otkit/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "network_simplex.hpp"
#include "otkit/error.hpp"

namespace otkit {

namespace {

void check_shapes(const DiscreteMeasure& source, const DiscreteMeasure& target,
                  const CostMatrix& cost) {
  if (cost.rows != source.size() || cost.cols != target.size()) {
    fail(ErrorCode::DimensionMismatch,
         "cost matrix is " + std::to_string(cost.rows) + "x" + std::to_string(cost.cols) +
             " but measures have " + std::to_string(source.size()) + " and " +
             std::to_string(target.size()) + " atoms");
  }
}

void check_balance(double supply, double demand) {
  if (std::abs(supply - demand) > 1e-9 * std::max(1.0, supply)) {
    fail(ErrorCode::Infeasible, "marginal masses differ: " + std::to_string(supply) + " vs " +
                                    std::to_string(demand));
  }
}

}  // namespace

LpSolution solve_lp_with_duals(const DiscreteMeasure& source, const DiscreteMeasure& target,
                               const CostMatrix& cost, PivotRule rule) {
  check_shapes(source, target, cost);
  check_balance(source.total_mass(), target.total_mass());

  const detail::DenseArcs arcs{cost.rows, cost.cols, cost.entries.data()};
  const auto result = detail::solve_transportation(
      std::span<const double>(source.weights()), std::span<const double>(target.weights()), arcs,
      rule == PivotRule::Bland ? detail::Pricing::Bland : detail::Pricing::BlockSearch);
  if (!result.feasible) fail(ErrorCode::Infeasible, "no feasible transport plan");

  LpSolution out;
  TransportPlan& plan = out.plan;
  plan.source_size = source.size();
  plan.target_size = target.size();
  plan.method = "lp";
  plan.iterations = result.pivots;
  plan.couplings.reserve(result.flows.size());
  for (const auto& f : result.flows) {
    const std::size_t i = arcs.source(f.arc);
    const std::size_t j = arcs.target(f.arc);
    plan.couplings.push_back({i, j, f.flow});
    plan.total_cost += cost(i, j) * f.flow;
  }
  out.source_potentials.assign(result.potentials.begin(),
                               result.potentials.begin() + static_cast<std::ptrdiff_t>(source.size()));
  out.target_potentials.assign(result.potentials.begin() + static_cast<std::ptrdiff_t>(source.size()),
                               result.potentials.end());
  return out;
}

TransportPlan solve_lp(const DiscreteMeasure& source, const DiscreteMeasure& target,
                       const CostMatrix& cost, PivotRule rule) {
  return solve_lp_with_duals(source, target, cost, rule).plan;
}

TransportPlan solve_auction(const DiscreteMeasure& source, const DiscreteMeasure& target,
                            const CostMatrix& cost, bool epsilon_scaling) {
  check_shapes(source, target, cost);
  const std::size_t n = source.size();
  if (target.size() != n) {
    fail(ErrorCode::UnequalMass, "auction needs equally many source and target atoms");
  }
  const double unit = 1.0 / static_cast<double>(n);
  for (const DiscreteMeasure* m : {&source, &target}) {
    for (double w : m->weights()) {
      if (std::abs(w - unit) > 1e-9 * unit) {
        fail(ErrorCode::UnequalMass, "auction needs every atom to carry mass 1/N");
      }
    }
  }

  TransportPlan plan;
  plan.source_size = n;
  plan.target_size = n;
  plan.method = "auction";

  const double max_cost = cost.max();
  double min_gap = std::numeric_limits<double>::infinity();
  {
    std::vector<double> sorted(cost.entries);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 1; k < sorted.size(); ++k) {
      const double gap = sorted[k] - sorted[k - 1];
      if (gap > 0.0) min_gap = std::min(min_gap, gap);
    }
  }
  // The final assignment total is within n*eps of the optimum, so the average
  // cost is within eps. Keeping eps under min_gap / n does not by itself make
  // the assignment optimal for real costs (two assignment totals can differ by
  // far less than any entry gap), so eps is also held below a fixed fraction
  // of the largest cost. The floor keeps bid increments representable.
  const double floor = 1e-13 * std::max(max_cost, std::numeric_limits<double>::min());
  double threshold = 1e-11 * max_cost;
  if (std::isfinite(min_gap)) threshold = std::min(threshold, min_gap / static_cast<double>(n));
  threshold = std::max(threshold, floor);

  std::vector<std::size_t> owner(n, n);     // object -> person
  std::vector<std::size_t> assigned(n, n);  // person -> object
  std::vector<double> price(n, 0.0);
  std::size_t bids = 0;

  auto run_phase = [&](double eps) {
    std::fill(owner.begin(), owner.end(), n);
    std::fill(assigned.begin(), assigned.end(), n);
    std::vector<std::size_t> queue(n);
    std::iota(queue.begin(), queue.end(), 0);
    std::reverse(queue.begin(), queue.end());
    while (!queue.empty()) {
      const std::size_t person = queue.back();
      queue.pop_back();
      const double* row = cost.entries.data() + person * n;
      double best = -std::numeric_limits<double>::infinity();
      double second = -std::numeric_limits<double>::infinity();
      std::size_t best_object = 0;
      for (std::size_t j = 0; j < n; ++j) {
        const double value = -row[j] - price[j];
        if (value > best) {
          second = best;
          best = value;
          best_object = j;
        } else if (value > second) {
          second = value;
        }
      }
      const double increment = n == 1 ? eps : best - second + eps;
      price[best_object] += increment;
      ++bids;
      const std::size_t previous = owner[best_object];
      owner[best_object] = person;
      assigned[person] = best_object;
      if (previous != n) {
        assigned[previous] = n;
        queue.push_back(previous);
      }
    }
  };

  if (max_cost <= 0.0 || n == 1) {
    run_phase(1.0);
  } else if (epsilon_scaling) {
    double eps = max_cost / 2.0;
    while (true) {
      run_phase(eps);
      if (eps < threshold) break;
      eps /= 4.0;
    }
  } else {
    run_phase(threshold * 0.999);
  }

  plan.iterations = bids;
  plan.couplings.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    plan.couplings.push_back({i, assigned[i], source.weight(i)});
    plan.total_cost += cost(i, assigned[i]) * source.weight(i);
  }
  return plan;
}

}  // namespace otkit
