// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Every reference value comes from an oracle in support/ or from a
// closed form written out below.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "commands.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "otkit/cdt.hpp"
#include "otkit/entropic.hpp"
#include "otkit/exact1d.hpp"
#include "otkit/geodesics.hpp"
#include "otkit/lp.hpp"
#include "otkit/sliced.hpp"

using namespace otkit;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> flat(const DiscreteMeasure& m) { return m.weights(); }

// ---------------------------------------------------------------------------

Outcome ac1_closed_form_vs_lp() {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> size(1, 30);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto mu = fixture::random_measure(rng, 1, size(rng));
    const auto nu = fixture::random_measure(rng, 1, size(rng));
    for (double p : {1.0, 2.0}) {
      const double lp = std::pow(solve_lp(mu, nu, cost_matrix(mu, nu, p)).total_cost, 1.0 / p);
      worst = std::max(worst, std::abs(wasserstein_1d(mu, nu, p) - lp));
    }
  }
  return {worst <= 1e-8, fmt("max |W_1d - LP^(1/p)| = %.2e over 200 pairs x p in {1,2}", worst)};
}

Outcome ac2_vertex_enumeration() {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> size(1, 6);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t dim = 1 + trial % 2;
    const auto mu = fixture::random_measure(rng, dim, size(rng));
    const auto nu = fixture::random_measure(rng, dim, size(rng));
    const auto cost = cost_matrix(mu, nu, 2.0);
    const double lp = solve_lp(mu, nu, cost).total_cost;
    const double brute = oracle::vertex_enumeration_min(flat(mu), flat(nu), cost.entries);
    worst = std::max(worst, std::abs(lp - brute));
  }
  return {worst <= 1e-10, fmt("max |LP - vertex minimum| = %.2e over 500 cases", worst)};
}

Outcome ac3_marginals() {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> size(1, 40);
  double worst_lp = 0.0;
  double worst_sk = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto mu = fixture::random_measure(rng, 2, size(rng));
    const auto nu = fixture::random_measure(rng, 2, size(rng));
    const auto cost = cost_matrix(mu, nu, 2.0);
    worst_lp = std::max(worst_lp, marginal_error(solve_lp(mu, nu, cost), mu, nu));
    const double lambda = (0.01 + 0.1 * (trial % 5)) * std::max(cost.max(), 1e-12);
    worst_sk = std::max(worst_sk, marginal_error(sinkhorn_solve(mu, nu, cost, lambda).plan, mu, nu));
  }
  return {std::max(worst_lp, worst_sk) <= 1e-8,
          fmt("max marginal error lp %.2e, sinkhorn %.2e over 100 instances", worst_lp, worst_sk)};
}

Outcome ac4_sinkhorn_limits() {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> size(2, 50);
  double worst_product = 0.0;
  double worst_gap = 0.0;
  bool monotone = true;
  const std::vector<double> sweep{1.0, 0.3, 0.1, 0.03, 0.01};
  for (int trial = 0; trial < 30; ++trial) {
    const auto mu = fixture::random_measure(rng, 2, size(rng));
    const auto nu = fixture::random_measure(rng, 2, size(rng));
    const auto cost = cost_matrix(mu, nu, 2.0);
    const auto plan = sinkhorn_solve(mu, nu, cost, 100.0 * cost.max()).plan.dense();
    double l1 = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      for (std::size_t j = 0; j < nu.size(); ++j) {
        l1 += std::abs(plan[i * nu.size() + j] - mu.weight(i) * nu.weight(j));
      }
    }
    worst_product = std::max(worst_product, l1);

    const double lp = solve_lp(mu, nu, cost).total_cost;
    double previous = std::numeric_limits<double>::infinity();
    for (double rel : sweep) {
      const double transport = sinkhorn_solve(mu, nu, cost, rel * cost.max()).transport_cost;
      if (transport > previous + 1e-12) monotone = false;
      previous = transport;
    }
    worst_gap = std::max(worst_gap, (previous - lp) / lp);
  }
  return {worst_product <= 1e-3 && monotone && worst_gap <= 0.02,
          fmt("product-plan L1 at lambda=100 max c: max %.2e (limit 1e-3); transport terms %s; "
              "gap at 0.01 max c: max %.2f%%",
              worst_product, monotone ? "nonincreasing" : "NOT monotone", 100.0 * worst_gap)};
}

Outcome ac5_auction() {
  std::mt19937_64 rng(5);
  double worst_equal = 0.0;
  double worst_perm = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n <= 64; ++n) {
    const int reps = n <= 7 ? 10 : 2;
    for (int r = 0; r < reps; ++r) {
      const auto mu = fixture::random_cloud(rng, 2, n);
      const auto nu = fixture::random_cloud(rng, 2, n);
      const auto cost = cost_matrix(mu, nu, 2.0);
      const double lp = solve_lp(mu, nu, cost).total_cost;
      const double auction = solve_auction(mu, nu, cost).total_cost;
      worst_equal = std::max(worst_equal, std::abs(lp - auction));
      if (n <= 7) {
        const double perm = oracle::permutation_min(cost.entries, n);
        worst_perm = std::max({worst_perm, lp - perm, auction - perm});
      }
    }
  }
  return {worst_equal <= 1e-9 && worst_perm <= 1e-12,
          fmt("max |auction - LP| = %.2e for N <= 64; max (solver - best permutation) = %.2e for N <= 7",
              worst_equal, worst_perm)};
}

std::vector<fixture::Bump> random_bumps(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, 3);
  std::vector<fixture::Bump> bumps;
  for (int b = count(rng); b > 0; --b) bumps.push_back({0.2 + u(rng), 0.25 + 0.5 * u(rng), 0.03 + 0.1 * u(rng)});
  return bumps;
}

Outcome ac6_cdt_isometry() {
  std::mt19937_64 rng(6);
  const auto ref = fixture::bumps_1d(1024, {{1.0, 0.5, 0.2}});
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = fixture::bumps_1d(1024, random_bumps(rng), 1e-8);
    const auto b = fixture::bumps_1d(1024, random_bumps(rng), 1e-8);
    const double w2 = wasserstein_1d(a, b, 2.0, 100000);
    const double d = cdt_distance(cdt_forward(a, ref), cdt_forward(b, ref));
    worst = std::max(worst, std::abs(d - w2) / w2);
  }
  return {worst <= 0.01, fmt("max relative |d_CDT - W2| / W2 = %.2e over 100 pairs", worst)};
}

double interior_error(const std::vector<double>& got, const std::vector<double>& expected,
                      std::size_t lo, std::size_t hi) {
  double err = 0.0;
  double scale = 0.0;
  for (std::size_t k = lo; k < hi; ++k) {
    err = std::max(err, std::abs(got[k] - expected[k]));
    scale = std::max(scale, std::abs(expected[k]));
  }
  return err / scale;
}

Outcome ac7_cdt_identities() {
  constexpr std::size_t n = 1024;
  // translation: J(x) = I(x - tau) has transform I~ + tau sqrt(I0)
  const auto ref = fixture::bumps_1d(n, {{1.0, 0.5, 0.08}}, 1e-8);
  const double tau = 0.05;
  const auto shifted = cdt_forward(fixture::bumps_1d(n, {{1.0, 0.5 + tau, 0.08}}, 1e-8), ref);
  std::vector<double> expected(n);
  for (std::size_t k = 0; k < n; ++k) expected[k] = tau * std::sqrt(ref.values[k]);
  const double translation = interior_error(shifted.values, expected, 200, 824);

  // scaling: J(x) = a I(a x) has transform I~ / a - x (a - 1) / a sqrt(I0)
  const double a = 1.25;
  auto on_sym = [](double center, double sigma) {
    return fixture::bumps_1d(n, {{1.0, center, sigma}}, 1e-8, -1.0, 1.0);
  };
  const auto sym_ref = on_sym(0.0, 0.2);
  const auto base = cdt_forward(on_sym(0.1, 0.15), sym_ref);
  const auto scaled = cdt_forward(on_sym(0.1 / a, 0.15 / a), sym_ref);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = sym_ref.center(0, k);
    expected[k] = base.values[k] / a - x * (a - 1.0) / a * std::sqrt(sym_ref.values[k]);
  }
  const double scaling = interior_error(scaled.values, expected, 300, 724);

  std::mt19937_64 rng(7);
  const auto wide = fixture::bumps_1d(n, {{1.0, 0.5, 0.2}});
  double round_trip = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto sig = fixture::bumps_1d(n, random_bumps(rng), 0.05);
    round_trip = std::max(round_trip, fixture::l1_distance(cdt_inverse(cdt_forward(sig, wide)), sig));
  }
  return {translation <= 0.01 && scaling <= 0.01 && round_trip <= 1e-3,
          fmt("interior error translation %.2e, scaling %.2e; round-trip L1 max %.2e", translation,
              scaling, round_trip)};
}

Outcome ac8_separability() {
  constexpr std::size_t n = 256;
  const double h = 1.0 / n;
  auto signal = [&](double tau, bool mixture) {
    const double sigma = 0.03;
    const double gap = 0.15;
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double x = (static_cast<double>(k) + 0.5) * h;
      auto g = [&](double m) { return std::exp(-(x - m) * (x - m) / (2 * sigma * sigma)); };
      v[k] = mixture ? 0.5 * g(tau - gap / 2) + 0.5 * g(tau + gap / 2) : g(tau);
    }
    return cdt_prepare(GridDensity::line(v, h, 0.5 * h), 1e-8);
  };
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> shift(0.4, 0.6);
  std::vector<GridDensity> single;
  std::vector<GridDensity> mixture;
  for (int s = 0; s < 200; ++s) {
    single.push_back(signal(shift(rng), false));
    mixture.push_back(signal(shift(rng), true));
  }
  std::vector<GridDensity> all(single);
  all.insert(all.end(), mixture.begin(), mixture.end());
  const auto ref = average_reference(all);
  auto features = [&](const std::vector<GridDensity>& cls, bool transform) {
    std::vector<std::vector<double>> rows;
    for (const auto& g : cls) rows.push_back(transform ? cdt_forward(g, ref).values : g.values);
    return rows;
  };
  const double in_signal = oracle::lda_training_accuracy(features(single, false), features(mixture, false), 1e-6);
  const double in_cdt = oracle::lda_training_accuracy(features(single, true), features(mixture, true), 1e-6);
  return {in_cdt == 1.0 && in_signal < 1.0,
          fmt("LDA training accuracy: CDT space %.4f, signal space %.4f", in_cdt, in_signal)};
}

Outcome ac9_constant_speed() {
  std::mt19937_64 rng(9);
  const std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0};
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t dim = 1 + trial % 2;
    const auto mu = fixture::random_measure(rng, dim, 12 + trial);
    const auto nu = fixture::random_measure(rng, dim, 15 + trial);
    const auto plan = solve_lp(mu, nu, cost_matrix(mu, nu, 2.0));
    const double w = std::sqrt(plan.total_cost);
    for (double s : times) {
      for (double t : times) {
        const auto a = interpolate(plan, mu, nu, s);
        const auto b = interpolate(plan, mu, nu, t);
        const double d = std::sqrt(std::max(0.0, solve_lp(a, b, cost_matrix(a, b, 2.0)).total_cost));
        const double expected = std::abs(t - s) * w;
        worst = std::max(worst, s == t ? d / w : std::abs(d - expected) / expected);
      }
    }
  }
  return {worst <= 0.02, fmt("max relative deviation from |t-s| W2 = %.2e over 10 pairs x 25 (s,t)", worst)};
}

Outcome ac10_sliced() {
  const double vx = 6.0;
  const double vy = 8.0;
  const double expected = std::hypot(vx, vy) / std::numbers::sqrt2;
  const auto a = fixture::gaussian_2d(96, 96, 42, 40, 6);
  const auto b = fixture::gaussian_2d(96, 96, 42 + vx, 40 + vy, 6);
  double worst = 0.0;
  for (std::size_t angles : {32, 64}) {
    worst = std::max(worst, std::abs(sliced_wasserstein(a, b, 2.0, angles) - expected) / expected);
  }
  const double self = sliced_wasserstein(a, a, 2.0, 32);
  const bool symmetric = sliced_wasserstein(a, b, 2.0, 32) == sliced_wasserstein(b, a, 2.0, 32);
  return {worst <= 0.05 && self == 0.0 && symmetric,
          fmt("translate law relative error %.2e at 32/64 angles; SW(a,a) = %g; symmetry %s", worst, self,
              symmetric ? "exact" : "BROKEN")};
}

Outcome ac11_gray_transfer() {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    std::normal_distribution<double> dark(50 + 20 * trial, 10 + 5 * trial);
    std::normal_distribution<double> light(180 - 10 * trial, 30);
    std::vector<double> src(65536);
    std::vector<double> dst(65536);
    for (double& v : src) v = std::clamp(std::round(dark(rng)), 0.0, 255.0);
    for (double& v : dst) v = std::clamp(std::round(light(rng)), 0.0, 255.0);
    const auto target = gray_histogram(dst);
    auto out = transfer_1d(gray_histogram(src), target, src);
    for (double& v : out) v = std::clamp(std::round(v), 0.0, 255.0);
    worst = std::max(worst, fixture::l1_distance(gray_histogram(out), target));
  }
  return {worst <= 0.02, fmt("max histogram L1 = %.2e over 5 image pairs at 256 bins", worst)};
}

GridDensity smooth_grid(std::size_t n, std::size_t dim, double cx, double cy) {
  const double h = 1.0 / static_cast<double>(n);
  std::vector<double> v(dim == 1 ? n : n * n);
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double x = (static_cast<double>(k % n) + 0.5) * h;
    const double y = (static_cast<double>(k / n) + 0.5) * h;
    const double r2 = (x - cx) * (x - cx) + (dim == 1 ? 0.0 : (y - cy) * (y - cy));
    v[k] = std::exp(-r2 / 0.02) + 0.5 * std::exp(-((x - 0.7) * (x - 0.7)) / 0.005) + 0.05;
  }
  return dim == 1 ? GridDensity::line(v, h, 0.5 * h) : GridDensity::image(n, n, v, h);
}

Outcome ac12_multiscale() {
  double worst = 0.0;
  double multiscale_s = 0.0;
  double direct_s = 0.0;
  for (std::size_t dim : {1, 2}) {
    for (std::size_t n : {16, 32, 64}) {
      const auto a = smooth_grid(n, dim, 0.3, 0.4);
      const auto b = smooth_grid(n, dim, 0.6, 0.55);
      auto start = std::chrono::steady_clock::now();
      const double ms = solve_multiscale(a, b, 2.0).total_cost;
      const double t_ms = seconds_since(start);
      const auto mu = to_measure(a, true).normalized();
      const auto nu = to_measure(b, true).normalized();
      start = std::chrono::steady_clock::now();
      const double direct = solve_lp(mu, nu, cost_matrix(mu, nu, 2.0)).total_cost;
      const double t_direct = seconds_since(start);
      worst = std::max(worst, std::abs(ms - direct) / direct);
      if (dim == 2 && n == 64) {
        multiscale_s = t_ms;
        direct_s = t_direct;
      }
    }
  }
  return {worst <= 1e-6 && multiscale_s <= direct_s,
          fmt("max relative cost difference %.2e; 64x64 wall time multiscale %.2fs vs direct %.2fs", worst,
              multiscale_s, direct_s)};
}

Outcome ac13_bench() {
  cli::BenchConfig config;
  config.repetitions = 3;
  const auto summary = cli::run_bench(config);
  bool any_timeout = false;
  for (const auto& r : summary.records) any_timeout = any_timeout || r.timed_out;
  return {summary.ordering_holds && !any_timeout,
          fmt("log-log slopes lp %.2f, sinkhorn %.2f on N in {64,128,256,512}%s", summary.slopes.at("lp"),
              summary.slopes.at("sinkhorn"), any_timeout ? " (timeouts)" : "")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"AC1  1-D closed form equals LP", ac1_closed_form_vs_lp},
      {"AC2  LP equals vertex enumeration", ac2_vertex_enumeration},
      {"AC3  plan marginals", ac3_marginals},
      {"AC4  Sinkhorn limits", ac4_sinkhorn_limits},
      {"AC5  auction equals LP", ac5_auction},
      {"AC6  CDT isometry", ac6_cdt_isometry},
      {"AC7  CDT identities and round trip", ac7_cdt_identities},
      {"AC8  linear separability in CDT space", ac8_separability},
      {"AC9  geodesic constant speed", ac9_constant_speed},
      {"AC10 sliced Wasserstein", ac10_sliced},
      {"AC11 grayvalue transfer", ac11_gray_transfer},
      {"AC12 multiscale equals LP", ac12_multiscale},
      {"AC13 bench slope ordering", ac13_bench},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
