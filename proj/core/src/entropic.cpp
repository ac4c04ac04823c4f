#include "otkit/entropic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "otkit/parallel.hpp"

namespace otkit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp_row(const double* log_k, const std::vector<double>& shift) {
  double top = kNegInf;
  for (std::size_t j = 0; j < shift.size(); ++j) top = std::max(top, log_k[j] + shift[j]);
  if (top == kNegInf) return kNegInf;
  double sum = 0.0;
  for (std::size_t j = 0; j < shift.size(); ++j) sum += std::exp(log_k[j] + shift[j] - top);
  return top + std::log(sum);
}

// LSE over i of (log_k(i,j) + shift_i) for every column j, streaming rows.
void log_sum_exp_cols(const std::vector<double>& log_k, std::size_t rows, std::size_t cols,
                      const std::vector<double>& shift, std::vector<double>& out,
                      std::vector<double>& scratch) {
  out.assign(cols, kNegInf);
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = log_k.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) out[j] = std::max(out[j], row[j] + shift[i]);
  }
  scratch.assign(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = log_k.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) scratch[j] += std::exp(row[j] + shift[i] - out[j]);
  }
  for (std::size_t j = 0; j < cols; ++j) {
    if (out[j] != kNegInf) out[j] += std::log(scratch[j]);
  }
}

// Scale rows then columns down to their targets and spread the leftover mass
// as a rank-one correction, which lands exactly on the marginals.
void round_to_marginals(std::vector<double>& plan, const std::vector<double>& p,
                        const std::vector<double>& q) {
  const std::size_t m = p.size();
  const std::size_t n = q.size();
  for (std::size_t i = 0; i < m; ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < n; ++j) r += plan[i * n + j];
    if (r > p[i]) {
      const double s = p[i] / r;
      for (std::size_t j = 0; j < n; ++j) plan[i * n + j] *= s;
    }
  }
  std::vector<double> col(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) col[j] += plan[i * n + j];
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (col[j] > q[j]) {
      const double s = q[j] / col[j];
      for (std::size_t i = 0; i < m; ++i) plan[i * n + j] *= s;
    }
  }
  std::vector<double> err_r(m, 0.0);
  std::vector<double> err_c(q);
  for (std::size_t i = 0; i < m; ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      r += plan[i * n + j];
      err_c[j] -= plan[i * n + j];
    }
    err_r[i] = std::max(0.0, p[i] - r);
  }
  double total = 0.0;
  for (double e : err_r) total += e;
  for (double& e : err_c) e = std::max(0.0, e);
  if (total <= 0.0) return;
  for (std::size_t i = 0; i < m; ++i) {
    if (err_r[i] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) plan[i * n + j] += err_r[i] * err_c[j] / total;
  }
}

}  // namespace

GibbsKernel GibbsKernel::from_cost(const CostMatrix& cost, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    fail(ErrorCode::InvalidArgument, "lambda must be positive and finite");
  }
  GibbsKernel k;
  k.rows = cost.rows;
  k.cols = cost.cols;
  k.lambda = lambda;
  k.log_entries.resize(cost.entries.size());
  for (std::size_t a = 0; a < cost.entries.size(); ++a) k.log_entries[a] = -cost.entries[a] / lambda;
  return k;
}

SinkhornResult sinkhorn_solve(const DiscreteMeasure& source, const DiscreteMeasure& target,
                              const CostMatrix& cost, double lambda,
                              const SinkhornOptions& options) {
  if (cost.rows != source.size() || cost.cols != target.size()) {
    fail(ErrorCode::DimensionMismatch, "cost matrix shape does not match the measures");
  }
  if (!(options.tol > 0.0)) fail(ErrorCode::InvalidArgument, "tol must be positive");
  if (options.max_iter == 0) fail(ErrorCode::InvalidArgument, "max_iter must be positive");
  const double supply = source.total_mass();
  const double demand = target.total_mass();
  if (!(supply > 0.0) || !(demand > 0.0)) fail(ErrorCode::AllZero, "measure has zero total mass");
  if (std::abs(supply - demand) > 1e-9 * std::max(1.0, supply)) {
    fail(ErrorCode::Infeasible, "marginal masses differ: " + std::to_string(supply) + " vs " +
                                    std::to_string(demand));
  }
  const GibbsKernel full = GibbsKernel::from_cost(cost, lambda);

  std::vector<std::size_t> rows_kept;
  std::vector<std::size_t> cols_kept;
  const DiscreteMeasure mu = source.without_zeros(&rows_kept);
  const DiscreteMeasure nu = target.without_zeros(&cols_kept);
  const std::size_t m = mu.size();
  const std::size_t n = nu.size();
  std::vector<double> log_k(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) log_k[i * n + j] = full(rows_kept[i], cols_kept[j]);
  }
  std::vector<double> log_p(m);
  std::vector<double> log_q(n);
  for (std::size_t i = 0; i < m; ++i) log_p[i] = std::log(mu.weight(i));
  for (std::size_t j = 0; j < n; ++j) log_q[j] = std::log(nu.weight(j));

  std::vector<double> f(m, 0.0);
  std::vector<double> g(n, 0.0);
  if (options.initial_log_w) {
    if (options.initial_log_w->size() != target.size()) {
      fail(ErrorCode::DimensionMismatch, "initial_log_w must have one entry per target atom");
    }
    for (std::size_t j = 0; j < n; ++j) g[j] = (*options.initial_log_w)[cols_kept[j]];
  }

  SinkhornState state;
  state.lambda = lambda;
  std::vector<double> row_lse(m);
  std::vector<double> col_lse;
  std::vector<double> scratch;
  std::vector<double> shifted(m);
  double residual = std::numeric_limits<double>::infinity();
  std::size_t iter = 0;
  while (true) {
    parallel_for(
        m, [&](std::size_t i) { row_lse[i] = log_sum_exp_row(log_k.data() + i * n, g); }, n);
    if (iter > 0) {
      // columns are exact after the last w-update, so the row error is the residual
      residual = 0.0;
      for (std::size_t i = 0; i < m; ++i) residual += std::abs(std::exp(f[i] + row_lse[i]) - mu.weight(i));
      if (options.checkpoint_every > 0 && iter % options.checkpoint_every == 0) {
        state.checkpoints.emplace_back(iter, residual);
      }
      if (residual <= options.tol || iter >= options.max_iter) break;
    }
    for (std::size_t i = 0; i < m; ++i) f[i] = log_p[i] - row_lse[i];
    log_sum_exp_cols(log_k, m, n, f, col_lse, scratch);
    for (std::size_t j = 0; j < n; ++j) g[j] = log_q[j] - col_lse[j];
    ++iter;
  }
  if (state.checkpoints.empty() || state.checkpoints.back().first != iter) {
    state.checkpoints.emplace_back(iter, residual);
  }
  state.iterations = iter;
  state.marginal_residual = residual;
  state.log_v.assign(source.size(), kNegInf);
  state.log_w.assign(target.size(), kNegInf);
  for (std::size_t i = 0; i < m; ++i) state.log_v[rows_kept[i]] = f[i];
  for (std::size_t j = 0; j < n; ++j) state.log_w[cols_kept[j]] = g[j];
  if (residual > options.tol) {
    throw SinkhornNoConvergence("NoConvergence: Sinkhorn residual " + std::to_string(residual) +
                                    " above tol after " + std::to_string(iter) + " iterations",
                                std::move(state));
  }

  std::vector<double> dense(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) dense[i * n + j] = std::exp(f[i] + g[j] + log_k[i * n + j]);
  }
  if (options.round_marginals) round_to_marginals(dense, mu.weights(), nu.weights());

  SinkhornResult out;
  TransportPlan& plan = out.plan;
  plan.source_size = source.size();
  plan.target_size = target.size();
  plan.method = "sinkhorn";
  plan.iterations = iter;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double mass = dense[i * n + j];
      if (mass > 0.0) {
        plan.couplings.push_back({rows_kept[i], cols_kept[j], mass});
        plan.total_cost += cost(rows_kept[i], cols_kept[j]) * mass;
      }
    }
  }
  out.transport_cost = plan.total_cost;
  out.entropy = entropy(plan);
  out.regularized_cost = out.transport_cost - lambda * out.entropy;
  out.state = std::move(state);
  return out;
}

double sinkhorn_distance(const DiscreteMeasure& source, const DiscreteMeasure& target,
                         const CostMatrix& cost, double lambda, const SinkhornOptions& options) {
  return sinkhorn_solve(source, target, cost, lambda, options).regularized_cost;
}

double entropy(const TransportPlan& plan) {
  double h = 0.0;
  for (const auto& c : plan.couplings) {
    if (c.mass > 0.0) h -= c.mass * std::log(c.mass);
  }
  return h;
}

double kl_to_product(const TransportPlan& plan) {
  const auto rows = plan.row_sums();
  const auto cols = plan.column_sums();
  double kl = 0.0;
  for (const auto& c : plan.couplings) {
    if (c.mass > 0.0) kl += c.mass * std::log(c.mass / (rows[c.source] * cols[c.target]));
  }
  return kl;
}

}  // namespace otkit
