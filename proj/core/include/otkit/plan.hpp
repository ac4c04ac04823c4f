#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "otkit/measures.hpp"

namespace otkit {

struct Coupling {
  std::size_t source;
  std::size_t target;
  double mass;
};

/// Sparse coupling gamma between a source with M atoms and a target with N.
struct TransportPlan {
  std::vector<Coupling> couplings;
  std::size_t source_size = 0;
  std::size_t target_size = 0;
  double total_cost = 0.0;
  std::size_t iterations = 0;
  std::string method;

  std::vector<double> row_sums() const;
  std::vector<double> column_sums() const;
  /// Row-major M x N matrix.
  std::vector<double> dense() const;
};

/// sum_ij c_ij gamma_ij
double transport_cost(const TransportPlan& plan, const CostMatrix& cost);

/// Largest absolute deviation of the plan marginals from the measure weights.
double marginal_error(const TransportPlan& plan, const DiscreteMeasure& source,
                      const DiscreteMeasure& target);

}  // namespace otkit
