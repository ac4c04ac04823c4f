#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "otkit/error.hpp"
#include "otkit/measures.hpp"
#include "otkit/plan.hpp"

namespace otkit {

/// Log-domain Gibbs kernel, log K(i,j) = -c_ij / lambda.
struct GibbsKernel {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double lambda = 1.0;
  std::vector<double> log_entries;

  static GibbsKernel from_cost(const CostMatrix& cost, double lambda);
  double operator()(std::size_t i, std::size_t j) const noexcept {
    return log_entries[i * cols + j];
  }
};

/// Scaling vectors of gamma = D_v K D_w in log form, indexed like the
/// measures passed in (dropped zero-weight atoms hold -infinity).
struct SinkhornState {
  std::vector<double> log_v;
  std::vector<double> log_w;
  double lambda = 0.0;
  std::size_t iterations = 0;
  double marginal_residual = 0.0;
  /// (iteration, residual) sampled every SinkhornOptions::checkpoint_every
  /// iterations plus the final one.
  std::vector<std::pair<std::size_t, double>> checkpoints;
};

struct SinkhornOptions {
  double tol = 1e-9;
  std::size_t max_iter = 100000;
  std::size_t checkpoint_every = 10;
  /// Starting log_w (target side); defaults to zeros.
  std::optional<std::vector<double>> initial_log_w;
  /// Project the final iterate onto the marginal constraints exactly.
  bool round_marginals = true;
};

struct SinkhornResult {
  TransportPlan plan;
  SinkhornState state;
  double transport_cost = 0.0;    // sum c_ij gamma_ij
  double entropy = 0.0;           // h(gamma)
  double regularized_cost = 0.0;  // transport_cost - lambda * entropy
};

/// Thrown when max_iter is reached above tolerance; carries the last state.
class SinkhornNoConvergence : public Error {
 public:
  SinkhornNoConvergence(const std::string& message, SinkhornState state)
      : Error(ErrorCode::NoConvergence, message), state_(std::move(state)) {}

  const SinkhornState& state() const noexcept { return state_; }

 private:
  SinkhornState state_;
};

SinkhornResult sinkhorn_solve(const DiscreteMeasure& source, const DiscreteMeasure& target,
                              const CostMatrix& cost, double lambda,
                              const SinkhornOptions& options = {});

/// The regularized value sum c gamma - lambda h(gamma). Note that it is not a
/// metric: it is nonzero for mu = nu and can be negative for large lambda.
double sinkhorn_distance(const DiscreteMeasure& source, const DiscreteMeasure& target,
                         const CostMatrix& cost, double lambda,
                         const SinkhornOptions& options = {});

/// h(gamma) = -sum gamma ln gamma with 0 ln 0 = 0.
double entropy(const TransportPlan& plan);

/// KL(gamma | mu x nu) with the plan's own marginals as mu and nu.
double kl_to_product(const TransportPlan& plan);

}  // namespace otkit
