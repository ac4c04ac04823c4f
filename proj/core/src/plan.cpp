#include "otkit/plan.hpp"

#include <algorithm>
#include <cmath>

#include "otkit/error.hpp"

namespace otkit {

std::vector<double> TransportPlan::row_sums() const {
  std::vector<double> rows(source_size, 0.0);
  for (const auto& c : couplings) rows[c.source] += c.mass;
  return rows;
}

std::vector<double> TransportPlan::column_sums() const {
  std::vector<double> cols(target_size, 0.0);
  for (const auto& c : couplings) cols[c.target] += c.mass;
  return cols;
}

std::vector<double> TransportPlan::dense() const {
  std::vector<double> m(source_size * target_size, 0.0);
  for (const auto& c : couplings) m[c.source * target_size + c.target] += c.mass;
  return m;
}

double transport_cost(const TransportPlan& plan, const CostMatrix& cost) {
  if (cost.rows != plan.source_size || cost.cols != plan.target_size) {
    fail(ErrorCode::PlanMismatch, "cost matrix shape does not match the plan");
  }
  double total = 0.0;
  for (const auto& c : plan.couplings) total += cost(c.source, c.target) * c.mass;
  return total;
}

double marginal_error(const TransportPlan& plan, const DiscreteMeasure& source,
                      const DiscreteMeasure& target) {
  if (source.size() != plan.source_size || target.size() != plan.target_size) {
    fail(ErrorCode::PlanMismatch, "plan shape does not match the measures");
  }
  double worst = 0.0;
  const auto rows = plan.row_sums();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    worst = std::max(worst, std::abs(rows[i] - source.weight(i)));
  }
  const auto cols = plan.column_sums();
  for (std::size_t j = 0; j < cols.size(); ++j) {
    worst = std::max(worst, std::abs(cols[j] - target.weight(j)));
  }
  return worst;
}

}  // namespace otkit
