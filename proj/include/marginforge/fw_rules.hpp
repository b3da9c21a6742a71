#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "marginforge/core.hpp"

namespace marginforge {

enum class FwRule { classic, short_step, line_search, pairwise };

std::string_view to_string(FwRule rule);

/// Result of one Frank-Wolfe weight update.
struct FwStepOutcome {
  EnsembleWeights new_w;
  double lambda = 0.0;
  /// Upper end of the step interval: the away coefficient for pairwise
  /// steps, 1 otherwise.
  double lambda_max = 1.0;
  /// lambda < lambda_max.
  bool good_step = true;
};

/// f~*(-A w): the smoothed objective the FW rules descend on.
double smoothed_objective(const GainMatrix& a, const EnsembleWeights& w, const CapParams& params);

/// argmin over [0, upper] of phi(l) = f~*(-(start + l * direction)), by bisection
/// on the sign of phi'(l) = -d(l)^T direction.
double segment_line_search(std::span<const double> start, std::span<const double> direction,
                           double upper, const CapParams& params);

/// lambda = 2 / (t + 2).
FwStepOutcome classic_step(std::size_t t, const EnsembleWeights& w, std::size_t e_new);

/// lambda = clip_[0,1] d^T A(e - w) / (eta ||A(e - w)||_inf^2). Assumes d is
/// the entropy projection at the margins of w.
FwStepOutcome short_step(const GainMatrix& a, const EnsembleWeights& w, std::size_t e_new,
                         const Distribution& d, double eta);

/// Exact line search along w -> e_new on [0, 1].
FwStepOutcome line_search_step(const GainMatrix& a, const EnsembleWeights& w, std::size_t e_new,
                               const CapParams& params);

/// Moves mass from the away column (lowest edge under d within the support,
/// lowest index on ties) to e_new, with line search on [0, alpha_away].
FwStepOutcome pairwise_step(const GainMatrix& a, const EnsembleWeights& w, std::size_t e_new,
                            const Distribution& d, const CapParams& params);

/// Away column of a pairwise step.
std::size_t away_column(const GainMatrix& a, const EnsembleWeights& w, const Distribution& d);

/// Dispatches to the rule; t is the scheme's round counter.
FwStepOutcome apply_fw_rule(FwRule rule, std::size_t t, const GainMatrix& a,
                            const EnsembleWeights& w, std::size_t e_new, const Distribution& d,
                            const CapParams& params);

}  // namespace marginforge
