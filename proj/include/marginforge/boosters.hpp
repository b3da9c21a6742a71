#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "marginforge/core.hpp"
#include "marginforge/fw_rules.hpp"
#include "marginforge/weak_learner.hpp"

namespace marginforge {

enum class Secondary { none, lpboost, erlpboost };

/// Which candidate a round kept. `none` marks the terminating round, which
/// performs no update.
enum class ChosenRule { fw, secondary, none };

std::string_view to_string(Secondary s);
std::string_view to_string(ChosenRule r);

/// ceil(32 / eps^2 * ln(m / nu)).
std::size_t theoretical_iteration_bound(std::size_t m, double nu, double eps);

struct BoosterConfig {
  double eps = 0.01;
  double nu = 1.0;
  FwRule fw_rule = FwRule::short_step;
  Secondary secondary = Secondary::none;
  /// 0 selects theoretical_iteration_bound + 16.
  std::size_t max_iterations = 0;
  std::uint64_t seed = 0;
  /// Runs stop with timed_out = true once this instant has passed.
  std::optional<std::chrono::steady_clock::time_point> deadline;

  void validate(std::size_t m) const;
  std::size_t iteration_cap(std::size_t m) const;
};

struct IterationRecord {
  std::size_t t = 0;
  /// Edge of the hypothesis returned for d_t.
  double edge_new = 0.0;
  /// min over tau <= t of the returned edges (including the round-0 query).
  double min_edge = 0.0;
  /// f~*(-A w_t).
  double smoothed_obj = 0.0;
  /// min_{d in capped simplex} d^T A w_t.
  double soft_margin_obj = 0.0;
  /// min_edge + smoothed_obj.
  double eps_t = 0.0;
  ChosenRule rule = ChosenRule::none;
  /// Step of the FW candidate (logged even when the secondary candidate wins).
  double lambda = 0.0;
  bool good_step = false;
  std::int64_t wall_time_ns = 0;
};

/// Outcome of one booster run over the columns its learner produced.
struct BoostRun {
  CapParams params;
  GainMatrix columns{1};
  EnsembleWeights weights;
  std::vector<IterationRecord> records;
  bool converged = false;
  bool timed_out = false;
  double soft_margin = 0.0;
  double smoothed = 0.0;

  std::size_t iterations() const { return records.size(); }
};

/// Secondary update: receives the discovered columns and the FW candidate
/// (usable as a warm start) and returns any point of the restricted simplex.
using SecondaryFn = std::function<EnsembleWeights(const GainMatrix&, const CapParams&,
                                                  const EnsembleWeights& fw_candidate)>;

/// Empty function for Secondary::none.
SecondaryFn make_secondary(Secondary s);

/// LPBoost rule: the soft-margin LP optimum over the discovered columns.
EnsembleWeights secondary_lpboost(const GainMatrix& a, double nu);

struct FullyCorrectiveResult {
  EnsembleWeights w;
  /// Final FW gap max_k (d^T A)_k - d^T A w, an upper bound on suboptimality.
  double gap = 0.0;
  std::size_t iterations = 0;
  /// True when tol::kInnerMaxIter was reached before the gap tolerance.
  bool hit_iteration_cap = false;
};

/// ERLPBoost rule: minimizes f~*(-A w) over the discovered columns by
/// pairwise Frank-Wolfe until the FW gap is at most eps / 10.
FullyCorrectiveResult secondary_erlpboost(const GainMatrix& a, const CapParams& params,
                                          const std::optional<EnsembleWeights>& start = {});

/// The generic scheme: d_t is the entropy projection at the margins of w_t,
/// stop once eps_t <= eps/2, otherwise keep whichever of the FW candidate and
/// the secondary candidate has the smaller smoothed objective (ties keep FW).
BoostRun run_scheme(WeakLearner& learner, const BoosterConfig& config);
BoostRun run_scheme(WeakLearner& learner, const BoosterConfig& config,
                    const SecondaryFn& secondary);

/// Standalone LPBoost: d_t from the edge-min LP, stop when the new edge is
/// at most gamma_t + eps.
BoostRun run_lpboost(WeakLearner& learner, const BoosterConfig& config);

/// ERLPBoost as a configuration of the scheme: short step plus the fully
/// corrective secondary.
BoostRun run_erlpboost(WeakLearner& learner, const BoosterConfig& config);

enum class Algorithm { lpboost, erlpboost, cerlpboost, mlpb_ss, mlpb_pfw, mlpb_ls, mlpb_classic };

std::string_view to_string(Algorithm a);
/// Throws ConfigError on unknown names.
Algorithm parse_algorithm(std::string_view name);
/// Sets fw_rule / secondary on `config` for the named configuration.
BoosterConfig configure(Algorithm a, BoosterConfig config);
BoostRun run_algorithm(Algorithm a, WeakLearner& learner, const BoosterConfig& config);

/// Combined classifier H(x) = sum_j w_j h_j(x) over decision stumps.
struct TrainedModel {
  std::vector<StumpHypothesis> hypotheses;
  Vector weights;
  std::size_t feature_count = 0;
  std::string algo;
  double eps = 0.0;
  double nu = 0.0;
  std::size_t max_iterations = 0;
  std::uint64_t seed = 0;
  double soft_margin = 0.0;
  double smoothed = 0.0;
  bool converged = false;

  double score(std::span<const double> x) const;
  /// sign(score), ties to +1. Throws InputError on width mismatch.
  int predict(std::span<const double> x) const;
};

TrainedModel make_model(const BoostRun& run, const StumpLearner& learner, std::size_t feature_count);

}  // namespace marginforge
