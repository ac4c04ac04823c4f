#include "oracles.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

namespace oracle {

double vertex_enumeration_min(const std::vector<double>& p, const std::vector<double>& q,
                              const std::vector<double>& cost) {
  const std::size_t m = p.size();
  const std::size_t n = q.size();
  const std::size_t nodes = m + n;
  const std::size_t full = (std::size_t{1} << nodes) - 1;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr double kTol = 1e-12;

  // net[U]: supply minus demand inside the node set U
  std::vector<double> net(full + 1, 0.0);
  for (std::size_t u = 1; u <= full; ++u) {
    const auto v = static_cast<std::size_t>(std::countr_zero(u));
    net[u] = net[u & (u - 1)] + (v < m ? p[v] : -q[v - m]);
  }
  auto edge_cost = [&](std::size_t a, std::size_t b) {
    return a < m ? cost[a * n + (b - m)] : cost[b * n + (a - m)];
  };

  // h[v][U]: cheapest tree on U rooted at v in which every node except v is
  // balanced and every edge carries a nonnegative row-to-column flow.
  std::vector<std::vector<double>> h(nodes, std::vector<double>(full + 1, kInf));
  std::vector<std::size_t> order(full);
  std::iota(order.begin(), order.end(), 1);
  std::stable_sort(order.begin(), order.end(),
                   [](std::size_t a, std::size_t b) { return std::popcount(a) < std::popcount(b); });
  for (std::size_t u : order) {
    for (std::size_t v = 0; v < nodes; ++v) {
      if (!(u >> v & 1U)) continue;
      const std::size_t rest = u & ~(std::size_t{1} << v);
      if (rest == 0) {
        h[v][u] = 0.0;
        continue;
      }
      // the child subtree holding the lowest remaining node, then the rest
      const std::size_t low = rest & (~rest + 1);
      const std::size_t others = rest & ~low;
      double best = kInf;
      for (std::size_t sub = others;; sub = (sub - 1) & others) {
        const std::size_t w_set = sub | low;
        const double remaining = h[v][u & ~w_set];
        if (remaining < kInf) {
          // flow on the edge joining v to the subtree w_set
          const double flow = v < m ? -net[w_set] : net[w_set];
          if (flow >= -kTol) {
            for (std::size_t w = 0; w < nodes; ++w) {
              if (!(w_set >> w & 1U) || (w < m) == (v < m)) continue;
              const double below = h[w][w_set];
              if (below < kInf) {
                best = std::min(best, edge_cost(v, w) * std::max(flow, 0.0) + below + remaining);
              }
            }
          }
        }
        if (sub == 0) break;
      }
      h[v][u] = best;
    }
  }
  return h[0][full];
}

double permutation_min(const std::vector<double>& cost, std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += cost[i * n + perm[i]];
    best = std::min(best, total / static_cast<double>(n));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<double> linear_sinkhorn(const std::vector<double>& p, const std::vector<double>& q,
                                    const std::vector<double>& cost, double lambda, double tol,
                                    std::size_t max_iter) {
  const std::size_t m = p.size();
  const std::size_t n = q.size();
  std::vector<double> kernel(m * n);
  for (std::size_t k = 0; k < kernel.size(); ++k) kernel[k] = std::exp(-cost[k] / lambda);
  std::vector<double> u(m, 1.0);
  std::vector<double> v(n, 1.0);
  for (std::size_t it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i < m; ++i) {
      double kv = 0.0;
      for (std::size_t j = 0; j < n; ++j) kv += kernel[i * n + j] * v[j];
      u[i] = p[i] / kv;
    }
    for (std::size_t j = 0; j < n; ++j) {
      double ku = 0.0;
      for (std::size_t i = 0; i < m; ++i) ku += kernel[i * n + j] * u[i];
      v[j] = q[j] / ku;
    }
    double err = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += u[i] * kernel[i * n + j] * v[j];
      err += std::abs(row - p[i]);
    }
    if (err < tol) break;
  }
  std::vector<double> plan(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) plan[i * n + j] = u[i] * kernel[i * n + j] * v[j];
  }
  return plan;
}

double quantile_scan_wasserstein(const std::vector<double>& xs, const std::vector<double>& ws,
                                 const std::vector<double>& ys, const std::vector<double>& vs,
                                 double p, std::size_t samples) {
  auto sorted = [](const std::vector<double>& x, const std::vector<double>& w) {
    std::vector<std::pair<double, double>> a;
    double total = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      a.emplace_back(x[k], w[k]);
      total += w[k];
    }
    std::sort(a.begin(), a.end());
    for (auto& e : a) e.second /= total;
    return a;
  };
  const auto a = sorted(xs, ws);
  const auto b = sorted(ys, vs);
  auto quantile = [](const std::vector<std::pair<double, double>>& atoms, double z) {
    double cum = 0.0;
    for (const auto& [x, w] : atoms) {
      cum += w;
      if (cum >= z) return x;
    }
    return atoms.back().first;
  };
  double sum = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double z = (static_cast<double>(k) + 0.5) / static_cast<double>(samples);
    sum += std::pow(std::abs(quantile(a, z) - quantile(b, z)), p);
  }
  return std::pow(sum / static_cast<double>(samples), 1.0 / p);
}

double lda_training_accuracy(const std::vector<std::vector<double>>& class_a,
                             const std::vector<std::vector<double>>& class_b, double rel_ridge) {
  const auto d = static_cast<Eigen::Index>(class_a.front().size());
  auto to_matrix = [d](const std::vector<std::vector<double>>& rows) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      x.row(static_cast<Eigen::Index>(r)) = Eigen::Map<const Eigen::RowVectorXd>(rows[r].data(), d);
    }
    return x;
  };
  const Eigen::MatrixXd a = to_matrix(class_a);
  const Eigen::MatrixXd b = to_matrix(class_b);
  const Eigen::RowVectorXd mean_a = a.colwise().mean();
  const Eigen::RowVectorXd mean_b = b.colwise().mean();
  const Eigen::MatrixXd ca = a.rowwise() - mean_a;
  const Eigen::MatrixXd cb = b.rowwise() - mean_b;
  Eigen::MatrixXd scatter = ca.transpose() * ca + cb.transpose() * cb;
  const double ridge = rel_ridge * scatter.trace() / static_cast<double>(d);
  scatter.diagonal().array() += std::max(ridge, 1e-300);
  const Eigen::VectorXd w = scatter.ldlt().solve((mean_a - mean_b).transpose());
  const double threshold = 0.5 * (mean_a.dot(w) + mean_b.dot(w));
  std::size_t correct = 0;
  for (Eigen::Index r = 0; r < a.rows(); ++r) correct += a.row(r).dot(w) > threshold ? 1 : 0;
  for (Eigen::Index r = 0; r < b.rows(); ++r) correct += b.row(r).dot(w) <= threshold ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(a.rows() + b.rows());
}

}  // namespace oracle
