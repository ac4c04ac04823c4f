#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace otkit::cli {

inline constexpr int kSchemaVersion = 1;

/// Parses the command line and runs one subcommand. Reports go to `out`,
/// diagnostics to `err`. Returns the exit code: 0 on success, 1 for usage
/// errors, 2 for I/O and format errors, 3 for numerical failures.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

struct BenchRecord {
  std::string method;
  std::size_t n = 0;
  double wall_ms = 0.0;
  double cost = 0.0;
  double residual = 0.0;  // largest marginal deviation of the plan
  std::size_t iterations = 0;
  bool timed_out = false;
};

struct BenchConfig {
  std::vector<std::size_t> sizes{64, 128, 256, 512};
  std::vector<std::string> methods{"lp", "sinkhorn"};
  std::size_t repetitions = 1;
  std::uint64_t seed = 42;
  double rel_lambda = 0.05;
  double tol = 1e-6;
  double timeout_ms = 60000.0;  // later sizes of a method are skipped once exceeded
};

struct BenchSummary {
  std::vector<BenchRecord> records;
  std::map<std::string, double> slopes;  // log-log runtime slope per method
  /// slope(lp) > slope(sinkhorn); true when either method was not run.
  bool ordering_holds = true;
};

/// Random point clouds in the unit square, n points per side with equal
/// weights and squared Euclidean cost. Times are the minimum over repetitions.
BenchSummary run_bench(const BenchConfig& config);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace otkit::cli
