#pragma once

// Primal network simplex for the uncapacitated transportation problem.
//
// Nodes 0..M-1 are sources, M..M+N-1 are sinks and M+N is an artificial root.
// Every node starts attached to the root by an artificial arc, which gives a
// strongly feasible initial tree. The leaving arc is chosen with Cunningham's
// rule (last blocking arc in cycle orientation starting at the join node), so
// degenerate pivots cannot cycle. Potentials satisfy
//   cost(a) + pi[source(a)] - pi[target(a)] = 0   on tree arcs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "otkit/error.hpp"

namespace otkit::detail {

enum class Pricing { BlockSearch, Bland };

/// All M x N pairs of a cost matrix; arc a joins source a / N and sink a % N.
struct DenseArcs {
  std::size_t rows;
  std::size_t cols;
  const double* costs;

  std::size_t size() const noexcept { return rows * cols; }
  std::uint32_t source(std::size_t a) const noexcept { return static_cast<std::uint32_t>(a / cols); }
  std::uint32_t target(std::size_t a) const noexcept { return static_cast<std::uint32_t>(a % cols); }
  double cost(std::size_t a) const noexcept { return costs[a]; }
};

/// Explicit arc list used for restricted (multiscale) problems.
struct SparseArcs {
  std::vector<std::uint32_t> sources;
  std::vector<std::uint32_t> targets;
  std::vector<double> costs;

  std::size_t size() const noexcept { return sources.size(); }
  std::uint32_t source(std::size_t a) const noexcept { return sources[a]; }
  std::uint32_t target(std::size_t a) const noexcept { return targets[a]; }
  double cost(std::size_t a) const noexcept { return costs[a]; }
};

struct ArcFlow {
  std::size_t arc;
  double flow;
};

struct SimplexResult {
  bool feasible = true;
  double artificial_flow = 0.0;
  std::vector<ArcFlow> flows;     // positive flows on real arcs
  std::vector<double> potentials;  // M + N entries (root excluded)
  std::size_t pivots = 0;
};

template <class Arcs>
class NetworkSimplex {
 public:
  NetworkSimplex(std::span<const double> supply, std::span<const double> demand, const Arcs& arcs)
      : arcs_(arcs),
        m_(supply.size()),
        n_(demand.size()),
        root_(static_cast<std::uint32_t>(supply.size() + demand.size())),
        arc_count_(arcs.size()) {
    const std::size_t nodes = m_ + n_ + 1;
    parent_.assign(nodes, root_);
    pred_.assign(nodes, 0);
    up_.assign(nodes, 0);
    depth_.assign(nodes, 1);
    pi_.assign(nodes, 0.0);
    flow_.assign(nodes, 0.0);
    adjacency_.assign(nodes, {});
    art_up_.assign(m_ + n_, 1);
    art_cost_.assign(m_ + n_, 0.0);

    double max_cost = 0.0;
    for (std::size_t a = 0; a < arc_count_; ++a) max_cost = std::max(max_cost, std::abs(arcs_.cost(a)));
    const double artificial = (max_cost + 1.0) * static_cast<double>(nodes);
    epsilon_ = 1e-12 * std::max(max_cost, std::numeric_limits<double>::min());

    depth_[root_] = 0;
    parent_[root_] = root_;
    for (std::uint32_t v = 0; v < root_; ++v) {
      const std::size_t art = arc_count_ + v;
      pred_[v] = art;
      const double b = v < m_ ? supply[v] : -demand[v - m_];
      if (b >= 0.0) {
        art_up_[v] = 1;
        art_cost_[v] = 0.0;
        up_[v] = 1;
        flow_[v] = b;
        pi_[v] = 0.0;
      } else {
        art_up_[v] = 0;
        art_cost_[v] = artificial;
        up_[v] = 0;
        flow_[v] = -b;
        pi_[v] = artificial;
      }
      adjacency_[v].push_back(art);
      adjacency_[root_].push_back(art);
    }
    block_size_ = std::max<std::size_t>(
        10, static_cast<std::size_t>(std::sqrt(static_cast<double>(std::max<std::size_t>(arc_count_, 1)))));
  }

  SimplexResult run(Pricing pricing, std::size_t max_pivots) {
    SimplexResult result;
    std::size_t entering = 0;
    while (pricing == Pricing::Bland ? find_first_eligible(entering) : find_block(entering)) {
      if (++result.pivots > max_pivots) {
        fail(ErrorCode::NoConvergence,
             "network simplex exceeded " + std::to_string(max_pivots) + " pivots");
      }
      pivot(entering);
    }
    for (std::uint32_t v = 0; v < root_; ++v) {
      const std::size_t a = pred_[v];
      if (a >= arc_count_) {
        const std::size_t node = a - arc_count_;
        if (!art_up_[node]) result.artificial_flow += flow_[v];
      } else if (flow_[v] > 0.0) {
        result.flows.push_back({a, flow_[v]});
      }
    }
    std::sort(result.flows.begin(), result.flows.end(),
              [](const ArcFlow& x, const ArcFlow& y) { return x.arc < y.arc; });
    result.potentials.assign(pi_.begin(), pi_.end() - 1);
    return result;
  }

 private:
  std::uint32_t tail(std::size_t a) const noexcept {
    if (a < arc_count_) return arcs_.source(a);
    const auto v = static_cast<std::uint32_t>(a - arc_count_);
    return art_up_[v] ? v : root_;
  }
  std::uint32_t head(std::size_t a) const noexcept {
    if (a < arc_count_) return static_cast<std::uint32_t>(m_ + arcs_.target(a));
    const auto v = static_cast<std::uint32_t>(a - arc_count_);
    return art_up_[v] ? root_ : v;
  }
  double cost(std::size_t a) const noexcept {
    return a < arc_count_ ? arcs_.cost(a) : art_cost_[a - arc_count_];
  }
  double reduced_cost(std::size_t a) const noexcept {
    return arcs_.cost(a) + pi_[arcs_.source(a)] - pi_[m_ + arcs_.target(a)];
  }

  bool find_first_eligible(std::size_t& entering) const {
    for (std::size_t a = 0; a < arc_count_; ++a) {
      if (reduced_cost(a) < -epsilon_) {
        entering = a;
        return true;
      }
    }
    return false;
  }

  bool find_block(std::size_t& entering) {
    double best = 0.0;
    std::size_t count = block_size_;
    std::size_t a = next_arc_;
    for (std::size_t seen = 0; seen < arc_count_; ++seen) {
      const double rc = reduced_cost(a);
      if (rc < best) {
        best = rc;
        entering = a;
      }
      if (++a == arc_count_) a = 0;
      if (--count == 0) {
        if (best < -epsilon_) {
          next_arc_ = a;
          return true;
        }
        count = block_size_;
      }
    }
    if (best < -epsilon_) {
      next_arc_ = a;
      return true;
    }
    return false;
  }

  void detach(std::uint32_t node, std::size_t arc) {
    auto& list = adjacency_[node];
    auto it = std::find(list.begin(), list.end(), arc);
    *it = list.back();
    list.pop_back();
  }

  void pivot(std::size_t entering) {
    const std::uint32_t first = tail(entering);
    const std::uint32_t second = head(entering);

    std::uint32_t u = first;
    std::uint32_t v = second;
    while (u != v) {
      if (depth_[u] > depth_[v]) {
        u = parent_[u];
      } else if (depth_[v] > depth_[u]) {
        v = parent_[v];
      } else {
        u = parent_[u];
        v = parent_[v];
      }
    }
    const std::uint32_t join = u;

    constexpr double kInf = std::numeric_limits<double>::infinity();
    double delta = kInf;
    std::uint32_t u_out = root_;
    int side = 0;
    for (std::uint32_t w = first; w != join; w = parent_[w]) {
      const double d = up_[w] ? flow_[w] : kInf;
      if (d < delta) {
        delta = d;
        u_out = w;
        side = 1;
      }
    }
    for (std::uint32_t w = second; w != join; w = parent_[w]) {
      const double d = up_[w] ? kInf : flow_[w];
      if (d <= delta) {
        delta = d;
        u_out = w;
        side = 2;
      }
    }
    if (side == 0) fail(ErrorCode::Infeasible, "transportation problem is unbounded");

    for (std::uint32_t w = first; w != join; w = parent_[w]) {
      flow_[w] = std::max(0.0, up_[w] ? flow_[w] - delta : flow_[w] + delta);
    }
    for (std::uint32_t w = second; w != join; w = parent_[w]) {
      flow_[w] = std::max(0.0, up_[w] ? flow_[w] + delta : flow_[w] - delta);
    }

    // swap the leaving arc for the entering arc in the tree
    const std::size_t leaving = pred_[u_out];
    detach(u_out, leaving);
    detach(parent_[u_out], leaving);
    adjacency_[first].push_back(entering);
    adjacency_[second].push_back(entering);

    // the endpoint of the entering arc that hangs below u_out becomes the
    // new root of the detached subtree
    const std::uint32_t hang = side == 1 ? first : second;
    const std::uint32_t anchor = side == 1 ? second : first;

    // pred arcs along hang..u_out reverse; shift their flows one step
    double carried = delta;
    for (std::uint32_t w = hang;; w = parent_[w]) {
      const double old = flow_[w];
      flow_[w] = carried;
      carried = old;
      if (w == u_out) break;
    }

    parent_[hang] = anchor;
    pred_[hang] = entering;
    relabel(hang, anchor);
    stack_.clear();
    stack_.push_back(hang);
    while (!stack_.empty()) {
      const std::uint32_t x = stack_.back();
      stack_.pop_back();
      for (std::size_t a : adjacency_[x]) {
        if (a == pred_[x]) continue;
        const std::uint32_t y = tail(a) == x ? head(a) : tail(a);
        parent_[y] = x;
        pred_[y] = a;
        relabel(y, x);
        stack_.push_back(y);
      }
    }
  }

  // sets up_, depth_ and pi_ of `child` given its pred arc and parent
  void relabel(std::uint32_t child, std::uint32_t par) {
    const std::size_t a = pred_[child];
    up_[child] = tail(a) == child ? 1 : 0;
    depth_[child] = depth_[par] + 1;
    pi_[child] = up_[child] ? pi_[par] - cost(a) : pi_[par] + cost(a);
  }

  const Arcs& arcs_;
  std::size_t m_;
  std::size_t n_;
  std::uint32_t root_;
  std::size_t arc_count_;
  double epsilon_ = 0.0;
  std::size_t block_size_ = 10;
  std::size_t next_arc_ = 0;

  std::vector<std::uint32_t> parent_;
  std::vector<std::size_t> pred_;
  std::vector<char> up_;
  std::vector<std::uint32_t> depth_;
  std::vector<double> pi_;
  std::vector<double> flow_;  // flow on pred_[v]
  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<char> art_up_;
  std::vector<double> art_cost_;
  std::vector<std::uint32_t> stack_;
};

template <class Arcs>
SimplexResult solve_transportation(std::span<const double> supply, std::span<const double> demand,
                                   const Arcs& arcs, Pricing pricing = Pricing::BlockSearch) {
  NetworkSimplex<Arcs> simplex(supply, demand, arcs);
  const std::size_t nodes = supply.size() + demand.size();
  const std::size_t max_pivots = 2000 * nodes + 100000;
  SimplexResult result = simplex.run(pricing, max_pivots);
  double total = 0.0;
  for (double s : supply) total += s;
  result.feasible = result.artificial_flow <= 1e-9 * std::max(total, 1e-300);
  return result;
}

}  // namespace otkit::detail
