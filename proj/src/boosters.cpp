#include "marginforge/boosters.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <tuple>
#include <utility>

#include "marginforge/constants.hpp"
#include "marginforge/entropy.hpp"
#include "marginforge/lp.hpp"

namespace marginforge {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ns(Clock::time_point since) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - since).count();
}

bool past(const BoosterConfig& config) {
  return config.deadline && Clock::now() >= *config.deadline;
}

// phi(l) = f~*(-(start + l dir)) has phi' = -d^T dir and, on the uncapped
// set U where d is a softmax of -eta theta scaled to the free mass,
// phi'' = eta (sum_U d s^2 - (sum_U d s)^2 / d(U)).
std::pair<double, double> slope_curvature(const Distribution& d, const Vector& dir,
                                          const CapParams& params) {
  const double cap = params.cap();
  double slope = 0.0;
  double mass = 0.0;
  double first = 0.0;
  double second = 0.0;
  for (std::size_t i = 0; i < dir.size(); ++i) {
    const double di = d.weights[i];
    slope -= di * dir[i];
    if (di < cap * (1.0 - 1e-12)) {
      mass += di;
      first += di * dir[i];
      second += di * dir[i] * dir[i];
    }
  }
  const double curvature = mass > 0.0 ? params.eta * std::max(0.0, second - first * first / mass) : 0.0;
  return {slope, curvature};
}

std::pair<double, double> slope_curvature_at(const Vector& start, const Vector& dir, double l,
                                             const CapParams& params, Vector& scratch) {
  for (std::size_t i = 0; i < scratch.size(); ++i) scratch[i] = start[i] + l * dir[i];
  return slope_curvature(capped_entropy_projection(scratch, params).d, dir, params);
}

// Minimizes phi on [0, upper] from phi'(0) = g0, phi''(0) = h0: Newton steps
// kept inside a sign bracket, bisection whenever Newton would leave it.
double newton_segment_search(const Vector& start, const Vector& dir, double upper, double g0,
                             double h0, const CapParams& params) {
  if (g0 >= 0.0) return 0.0;
  Vector scratch(start.size());
  double lo = 0.0;
  double hi = upper;
  bool hi_checked = false;
  double x = 0.0;
  double g = g0;
  double h = h0;
  for (int it = 0; it < tol::kLineSearchMaxIter && hi - lo > tol::kLineSearchInterval; ++it) {
    double next = h > 0.0 ? x - g / h : hi;
    if (next >= hi && !hi_checked) {
      hi_checked = true;
      const double g_hi = slope_curvature_at(start, dir, upper, params, scratch).first;
      if (g_hi <= 0.0) return upper;
    }
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double moved = std::abs(next - x);
    x = next;
    std::tie(g, h) = slope_curvature_at(start, dir, x, params, scratch);
    if (g > 0.0) {
      hi = x;
      hi_checked = true;
    } else {
      lo = x;
    }
    if (g == 0.0 || moved <= 1e-13 * (1.0 + x)) break;
    // next Newton correction negligible: stop without paying for it
    if (h > 0.0 && std::abs(g / h) <= 1e-12 * (1.0 + x)) break;
  }
  return x;
}

void finish(BoostRun& run) {
  const Vector mw = margins(run.columns, run.weights);
  run.soft_margin = capped_min_linear(mw, run.params.nu).value;
  run.smoothed = -capped_entropy_projection(mw, run.params).objective;
}

}  // namespace

std::string_view to_string(Secondary s) {
  switch (s) {
    case Secondary::none: return "none";
    case Secondary::lpboost: return "lpboost";
    case Secondary::erlpboost: return "erlpboost";
  }
  return "unknown";
}

std::string_view to_string(ChosenRule r) {
  switch (r) {
    case ChosenRule::fw: return "fw";
    case ChosenRule::secondary: return "secondary";
    case ChosenRule::none: return "none";
  }
  return "unknown";
}

std::size_t theoretical_iteration_bound(std::size_t m, double nu, double eps) {
  check_nu(m, nu);
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  return static_cast<std::size_t>(
      std::ceil(32.0 / (eps * eps) * std::log(static_cast<double>(m) / nu)));
}

void BoosterConfig::validate(std::size_t m) const {
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  check_nu(m, nu);
}

std::size_t BoosterConfig::iteration_cap(std::size_t m) const {
  return max_iterations > 0 ? max_iterations : theoretical_iteration_bound(m, nu, eps) + 16;
}

EnsembleWeights secondary_lpboost(const GainMatrix& a, double nu) {
  return solve_edge_min(a, nu).w;
}

FullyCorrectiveResult secondary_erlpboost(const GainMatrix& a, const CapParams& params,
                                          const std::optional<EnsembleWeights>& start) {
  if (a.cols() == 0) throw StructuralError("fully corrective update needs at least one column");
  const double tolerance = std::max(params.eps / 10.0, 1e-12);

  FullyCorrectiveResult out;
  out.w = start ? *start : EnsembleWeights::point_mass(0);
  if (!out.w.is_valid()) throw StructuralError("fully corrective start is not in the simplex");
  Vector mw = margins(a, out.w);

  for (;; ++out.iterations) {
    const Distribution d = capped_entropy_projection(mw, params).d;
    const Vector e = edges(a, d);
    const auto toward = static_cast<std::size_t>(std::max_element(e.begin(), e.end()) - e.begin());
    out.gap = e[toward] - dot(d.weights, mw);
    if (out.gap <= tolerance) break;
    if (out.iterations >= static_cast<std::size_t>(tol::kInnerMaxIter)) {
      out.hit_iteration_cap = true;
      break;
    }
    std::size_t away = out.w.coeffs.begin()->first;
    for (const auto& [k, v] : out.w.coeffs) {
      if (e[k] < e[away]) away = k;
    }
    if (away == toward) break;

    const double cap = out.w.at(away);
    Vector direction(mw.size());
    for (std::size_t i = 0; i < mw.size(); ++i) direction[i] = a.at(i, toward) - a.at(i, away);
    const auto [g0, h0] = slope_curvature(d, direction, params);
    double lambda = newton_segment_search(mw, direction, cap, g0, h0, params);
    if (lambda >= cap) {
      lambda = cap;
      out.w.coeffs.erase(away);
    } else {
      out.w.coeffs[away] -= lambda;
    }
    out.w.coeffs[toward] += lambda;
    for (std::size_t i = 0; i < mw.size(); ++i) mw[i] += lambda * direction[i];
    // resync now and then; the incremental margins drift slowly
    if (out.iterations % 256 == 255) {
      out.w.normalize();
      mw = margins(a, out.w);
    }
  }
  out.w.normalize();
  return out;
}

SecondaryFn make_secondary(Secondary s) {
  switch (s) {
    case Secondary::none: return {};
    case Secondary::lpboost: {
      // The LP depends only on the discovered columns, which only grow; most
      // rounds rediscover a known hypothesis, so reuse the last solve.
      struct Memo {
        const GainMatrix* matrix = nullptr;
        std::size_t cols = 0;
        double nu = 0.0;
        EnsembleWeights w;
        EdgeMinSolver solver;
      };
      auto memo = std::make_shared<Memo>();
      return [memo](const GainMatrix& a, const CapParams& params, const EnsembleWeights&) {
        if (memo->matrix != &a || memo->cols != a.cols() || memo->nu != params.nu) {
          memo->w = memo->solver.solve(a, params.nu).w;
          memo->matrix = &a;
          memo->cols = a.cols();
          memo->nu = params.nu;
        }
        return memo->w;
      };
    }
    case Secondary::erlpboost:
      return [](const GainMatrix& a, const CapParams& params, const EnsembleWeights& fw) {
        return secondary_erlpboost(a, params, fw).w;
      };
  }
  throw ConfigError("unknown secondary rule");
}

BoostRun run_scheme(WeakLearner& learner, const BoosterConfig& config) {
  return run_scheme(learner, config, make_secondary(config.secondary));
}

BoostRun run_scheme(WeakLearner& learner, const BoosterConfig& config,
                    const SecondaryFn& secondary) {
  const std::size_t m = learner.example_count();
  config.validate(m);
  BoostRun run;
  run.params = CapParams::from_tolerance(m, config.nu, config.eps);
  run.columns = GainMatrix(m);
  const CapParams& params = run.params;
  const std::size_t cap = config.iteration_cap(m);

  LearnerResponse first = learner.best_response(Distribution::uniform(m));
  double min_edge = first.edge;
  run.weights = EnsembleWeights::point_mass(run.columns.add_column(std::move(first.column), first.id));
  Vector mw = margins(run.columns, run.weights);

  for (std::size_t t = 1; t <= cap; ++t) {
    if (past(config)) {
      run.timed_out = true;
      break;
    }
    const auto started = Clock::now();
    const ProjectionResult proj = capped_entropy_projection(mw, params);

    LearnerResponse resp = learner.best_response(proj.d);
    const std::size_t j = run.columns.add_column(std::move(resp.column), resp.id);
    min_edge = std::min(min_edge, resp.edge);

    IterationRecord rec;
    rec.t = t;
    rec.edge_new = resp.edge;
    rec.min_edge = min_edge;
    rec.smoothed_obj = -proj.objective;
    rec.soft_margin_obj = capped_min_linear(mw, params.nu).value;
    rec.eps_t = rec.min_edge + rec.smoothed_obj;

    if (rec.eps_t <= config.eps / 2.0) {
      rec.rule = ChosenRule::none;
      rec.good_step = false;
      rec.wall_time_ns = elapsed_ns(started);
      run.records.push_back(rec);
      run.converged = true;
      break;
    }

    FwStepOutcome fw = apply_fw_rule(config.fw_rule, t, run.columns, run.weights, j, proj.d, params);
    rec.lambda = fw.lambda;
    rec.good_step = fw.good_step;
    rec.rule = ChosenRule::fw;
    EnsembleWeights next = std::move(fw.new_w);
    if (secondary) {
      EnsembleWeights alt = secondary(run.columns, params, next);
      if (smoothed_objective(run.columns, alt, params) <
          smoothed_objective(run.columns, next, params)) {
        next = std::move(alt);
        rec.rule = ChosenRule::secondary;
      }
    }
    run.weights = std::move(next);
    mw = margins(run.columns, run.weights);
    rec.wall_time_ns = elapsed_ns(started);
    run.records.push_back(rec);
  }
  finish(run);
  return run;
}

BoostRun run_lpboost(WeakLearner& learner, const BoosterConfig& config) {
  const std::size_t m = learner.example_count();
  config.validate(m);
  BoostRun run;
  run.params = CapParams::from_tolerance(m, config.nu, config.eps);
  run.columns = GainMatrix(m);
  const std::size_t cap = config.iteration_cap(m);

  LearnerResponse first = learner.best_response(Distribution::uniform(m));
  double min_edge = first.edge;
  run.weights = EnsembleWeights::point_mass(run.columns.add_column(std::move(first.column), first.id));
  EdgeMinSolver solver;

  for (std::size_t t = 1; t <= cap; ++t) {
    if (past(config)) {
      run.timed_out = true;
      break;
    }
    const auto started = Clock::now();
    const EdgeMinSolution lp = solver.solve(run.columns, config.nu);
    run.weights = lp.w;

    LearnerResponse resp = learner.best_response(lp.d);
    min_edge = std::min(min_edge, resp.edge);

    IterationRecord rec;
    rec.t = t;
    rec.edge_new = resp.edge;
    rec.min_edge = min_edge;
    rec.smoothed_obj = smoothed_objective(run.columns, run.weights, run.params);
    rec.soft_margin_obj = lp.rho;
    rec.eps_t = rec.min_edge + rec.smoothed_obj;

    if (resp.edge <= lp.gamma + config.eps) {
      rec.rule = ChosenRule::none;
      rec.wall_time_ns = elapsed_ns(started);
      run.records.push_back(rec);
      run.converged = true;
      break;
    }
    run.columns.add_column(std::move(resp.column), resp.id);
    rec.rule = ChosenRule::secondary;
    rec.good_step = false;
    rec.wall_time_ns = elapsed_ns(started);
    run.records.push_back(rec);
  }
  finish(run);
  return run;
}

BoostRun run_erlpboost(WeakLearner& learner, const BoosterConfig& config) {
  return run_scheme(learner, configure(Algorithm::erlpboost, config));
}

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::lpboost: return "lpboost";
    case Algorithm::erlpboost: return "erlpboost";
    case Algorithm::cerlpboost: return "cerlpboost";
    case Algorithm::mlpb_ss: return "mlpb-ss";
    case Algorithm::mlpb_pfw: return "mlpb-pfw";
    case Algorithm::mlpb_ls: return "mlpb-ls";
    case Algorithm::mlpb_classic: return "mlpb-classic";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::lpboost, Algorithm::erlpboost, Algorithm::cerlpboost,
                      Algorithm::mlpb_ss, Algorithm::mlpb_pfw, Algorithm::mlpb_ls,
                      Algorithm::mlpb_classic}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

BoosterConfig configure(Algorithm a, BoosterConfig config) {
  switch (a) {
    case Algorithm::lpboost:
      config.secondary = Secondary::lpboost;
      break;
    case Algorithm::erlpboost:
      config.fw_rule = FwRule::short_step;
      config.secondary = Secondary::erlpboost;
      break;
    case Algorithm::cerlpboost:
      config.fw_rule = FwRule::short_step;
      config.secondary = Secondary::none;
      break;
    case Algorithm::mlpb_ss:
      config.fw_rule = FwRule::short_step;
      config.secondary = Secondary::lpboost;
      break;
    case Algorithm::mlpb_pfw:
      config.fw_rule = FwRule::pairwise;
      config.secondary = Secondary::lpboost;
      break;
    case Algorithm::mlpb_ls:
      config.fw_rule = FwRule::line_search;
      config.secondary = Secondary::lpboost;
      break;
    case Algorithm::mlpb_classic:
      config.fw_rule = FwRule::classic;
      config.secondary = Secondary::lpboost;
      break;
  }
  return config;
}

BoostRun run_algorithm(Algorithm a, WeakLearner& learner, const BoosterConfig& config) {
  if (a == Algorithm::lpboost) return run_lpboost(learner, config);
  return run_scheme(learner, configure(a, config));
}

double TrainedModel::score(std::span<const double> x) const {
  if (x.size() != feature_count) {
    throw InputError("row has " + std::to_string(x.size()) + " features, model expects " +
                     std::to_string(feature_count));
  }
  double s = 0.0;
  for (std::size_t k = 0; k < hypotheses.size(); ++k) s += weights[k] * hypotheses[k].predict(x);
  return s;
}

int TrainedModel::predict(std::span<const double> x) const { return score(x) >= 0.0 ? 1 : -1; }

TrainedModel make_model(const BoostRun& run, const StumpLearner& learner, std::size_t feature_count) {
  TrainedModel model;
  model.feature_count = feature_count;
  for (const auto& [k, v] : run.weights.coeffs) {
    model.hypotheses.push_back(learner.stump(run.columns.id(k)));
    model.weights.push_back(v);
  }
  model.nu = run.params.nu;
  model.eps = run.params.eps;
  model.soft_margin = run.soft_margin;
  model.smoothed = run.smoothed;
  model.converged = run.converged;
  return model;
}

}  // namespace marginforge
