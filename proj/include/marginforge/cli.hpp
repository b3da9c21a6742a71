#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "marginforge/boosters.hpp"
#include "marginforge/io.hpp"

namespace marginforge {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int other = 1;
inline constexpr int not_converged = 2;
inline constexpr int budget_exceeded = 3;
inline constexpr int input_mismatch = 4;
}  // namespace exit_code

/// Full-pool problem larger than the configured budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// Width mismatch between a model and a dataset.
class MismatchError : public InputError {
 public:
  using InputError::InputError;
};

inline constexpr std::size_t kDefaultOracleBudget = 2'000'000;

struct RunManifest {
  std::string data;
  DataFormat format = DataFormat::csv;
  std::string algo = "mlpb-ss";
  double nu_frac = 0.1;
  double eps = 0.01;
  std::size_t max_iters = 0;
  std::uint64_t seed = 0;
  std::string model_out;
  std::string log_out;
  double timeout_secs = 0.0;
};

/// nu = nu_frac * m clamped to [1, m]; nu_frac must lie in (0, 1].
double nu_from_fraction(double nu_frac, std::size_t m);

struct TrainResult {
  BoostRun run;
  TrainedModel model;
};

/// Runs the named algorithm on `data` with the stump learner.
TrainResult train(const Dataset& data, const RunManifest& manifest);

struct OracleResult {
  double rho_star = 0.0;
  std::size_t support_size = 0;
  std::size_t pool_size = 0;
};

/// Soft-margin LP optimum over the entire stump pool. Throws BudgetError
/// when pool size x m exceeds `budget`.
OracleResult full_pool_optimum(const Dataset& data, double nu,
                               std::size_t budget = kDefaultOracleBudget);

struct PredictResult {
  std::vector<int> labels;
  double error_rate = 0.0;
};

/// Throws MismatchError on width mismatch, InputError on an empty set.
PredictResult predict_all(const TrainedModel& model, const Dataset& data);

struct BenchManifest {
  std::string data;
  DataFormat format = DataFormat::csv;
  std::vector<std::string> algos;
  std::vector<double> nu_fracs;
  double eps = 0.01;
  std::size_t max_iters = 0;
  std::uint64_t seed = 0;
  std::string out;
  double timeout_secs = 0.0;
  /// 0 reads MARGINFORGE_THREADS, falling back to hardware concurrency.
  std::size_t threads = 0;
};

struct BenchRow {
  std::string algo;
  double nu_frac = 0.0;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  double seconds = 0.0;
  double final_soft_margin = 0.0;
  bool converged = false;
  bool timed_out = false;
};

inline constexpr const char* kBenchHeader =
    "algo,nu_frac,seed,iterations,seconds,final_soft_margin,converged";

/// One row per (algo, nu_frac) cell, in grid order (algo-major).
std::vector<BenchRow> bench(const Dataset& data, const BenchManifest& manifest);
std::string bench_csv(const std::vector<BenchRow>& rows);

std::size_t bench_threads(std::size_t requested);

// Command entry points; each returns the process exit code and reports
// errors on `err`.
int cmd_train(const RunManifest& manifest, std::ostream& out, std::ostream& err);
int cmd_oracle(const RunManifest& manifest, std::ostream& out, std::ostream& err,
               std::size_t budget = kDefaultOracleBudget);
int cmd_predict(const std::string& model_path, const std::string& data_path, DataFormat format,
                std::ostream& out, std::ostream& err);
int cmd_bench(const BenchManifest& manifest, std::ostream& out, std::ostream& err);
int cmd_generate(const SyntheticSpec& spec, const std::string& path, std::ostream& err);

}  // namespace marginforge
