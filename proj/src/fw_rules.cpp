#include "marginforge/fw_rules.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "marginforge/constants.hpp"
#include "marginforge/entropy.hpp"

namespace marginforge {

namespace {

void check_column(const GainMatrix& a, std::size_t e_new) {
  if (e_new >= a.cols()) {
    throw StructuralError("column " + std::to_string(e_new) + " out of range (" +
                          std::to_string(a.cols()) + " columns)");
  }
}

// w + lambda (e_new - w)
EnsembleWeights toward(const EnsembleWeights& w, std::size_t e_new, double lambda) {
  EnsembleWeights out;
  if (lambda < 1.0) {
    for (const auto& [k, v] : w.coeffs) out.coeffs[k] = (1.0 - lambda) * v;
  }
  out.coeffs[e_new] += lambda;
  out.normalize();
  return out;
}

double derivative(std::span<const double> start, std::span<const double> direction, double lambda,
                  const CapParams& params, Vector& scratch) {
  for (std::size_t i = 0; i < scratch.size(); ++i) scratch[i] = start[i] + lambda * direction[i];
  return -dot(capped_entropy_projection(scratch, params).d.weights, direction);
}

}  // namespace

std::string_view to_string(FwRule rule) {
  switch (rule) {
    case FwRule::classic: return "classic";
    case FwRule::short_step: return "short_step";
    case FwRule::line_search: return "line_search";
    case FwRule::pairwise: return "pairwise";
  }
  return "unknown";
}

double smoothed_objective(const GainMatrix& a, const EnsembleWeights& w, const CapParams& params) {
  return -capped_entropy_projection(margins(a, w), params).objective;
}

double segment_line_search(std::span<const double> start, std::span<const double> direction,
                           double upper, const CapParams& params) {
  if (start.size() != direction.size()) throw StructuralError("line search length mismatch");
  if (!(upper > 0.0)) return 0.0;
  Vector scratch(start.size());
  if (derivative(start, direction, 0.0, params, scratch) >= 0.0) return 0.0;
  if (derivative(start, direction, upper, params, scratch) <= 0.0) return upper;
  double lo = 0.0;
  double hi = upper;
  for (int it = 0; it < tol::kLineSearchMaxIter && hi - lo > tol::kLineSearchInterval; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (derivative(start, direction, mid, params, scratch) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

FwStepOutcome classic_step(std::size_t t, const EnsembleWeights& w, std::size_t e_new) {
  FwStepOutcome out;
  out.lambda = 2.0 / (static_cast<double>(t) + 2.0);
  out.new_w = toward(w, e_new, out.lambda);
  out.good_step = out.lambda < out.lambda_max;
  return out;
}

FwStepOutcome short_step(const GainMatrix& a, const EnsembleWeights& w, std::size_t e_new,
                         const Distribution& d, double eta) {
  check_column(a, e_new);
  const Vector current = margins(a, w);
  const Vector& target = a.column(e_new);
  double gap = 0.0;
  double spread = 0.0;
  for (std::size_t i = 0; i < current.size(); ++i) {
    const double diff = target[i] - current[i];
    gap += d.weights.at(i) * diff;
    spread = std::max(spread, std::abs(diff));
  }
  const double denom = eta * spread * spread;
  FwStepOutcome out;
  out.lambda = denom > 0.0 ? std::clamp(gap / denom, 0.0, 1.0) : 0.0;
  out.new_w = toward(w, e_new, out.lambda);
  out.good_step = out.lambda < out.lambda_max;
  return out;
}

FwStepOutcome line_search_step(const GainMatrix& a, const EnsembleWeights& w, std::size_t e_new,
                               const CapParams& params) {
  check_column(a, e_new);
  const Vector current = margins(a, w);
  Vector direction(current.size());
  for (std::size_t i = 0; i < current.size(); ++i) direction[i] = a.at(i, e_new) - current[i];
  FwStepOutcome out;
  out.lambda = segment_line_search(current, direction, 1.0, params);
  out.new_w = toward(w, e_new, out.lambda);
  out.good_step = out.lambda < out.lambda_max;
  return out;
}

std::size_t away_column(const GainMatrix& a, const EnsembleWeights& w, const Distribution& d) {
  if (w.empty()) throw StructuralError("pairwise step needs a non-empty support");
  std::size_t away = w.coeffs.begin()->first;
  double worst = 0.0;
  bool first = true;
  for (const auto& [k, v] : w.coeffs) {
    const double e = dot(d.weights, a.column(k));
    if (first || e < worst) {
      worst = e;
      away = k;
      first = false;
    }
  }
  return away;
}

FwStepOutcome pairwise_step(const GainMatrix& a, const EnsembleWeights& w, std::size_t e_new,
                            const Distribution& d, const CapParams& params) {
  check_column(a, e_new);
  const std::size_t away = away_column(a, w, d);
  FwStepOutcome out;
  out.lambda_max = w.at(away);
  if (away == e_new) {
    out.new_w = w;
    out.lambda = 0.0;
    out.good_step = out.lambda < out.lambda_max;
    return out;
  }
  const Vector current = margins(a, w);
  Vector direction(current.size());
  for (std::size_t i = 0; i < current.size(); ++i) direction[i] = a.at(i, e_new) - a.at(i, away);
  out.lambda = segment_line_search(current, direction, out.lambda_max, params);

  out.new_w = w;
  if (out.lambda >= out.lambda_max) {
    out.lambda = out.lambda_max;
    out.new_w.coeffs.erase(away);
  } else {
    out.new_w.coeffs[away] -= out.lambda;
  }
  out.new_w.coeffs[e_new] += out.lambda;
  out.new_w.normalize();
  out.good_step = out.lambda < out.lambda_max;
  return out;
}

FwStepOutcome apply_fw_rule(FwRule rule, std::size_t t, const GainMatrix& a,
                            const EnsembleWeights& w, std::size_t e_new, const Distribution& d,
                            const CapParams& params) {
  switch (rule) {
    case FwRule::classic: return classic_step(t, w, e_new);
    case FwRule::short_step: return short_step(a, w, e_new, d, params.eta);
    case FwRule::line_search: return line_search_step(a, w, e_new, params);
    case FwRule::pairwise: return pairwise_step(a, w, e_new, d, params);
  }
  throw ConfigError("unknown FW rule");
}

}  // namespace marginforge
