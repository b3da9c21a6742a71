#include "marginforge/lp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "marginforge/constants.hpp"
#include "marginforge/entropy.hpp"

namespace marginforge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kNone = static_cast<std::size_t>(-1);

}  // namespace

void StandardLp::validate() const {
  const std::size_t n = variables();
  if (constraint_matrix.size() != rows() || row_kinds.size() != rows()) {
    throw StructuralError("LP row count mismatch between matrix, rhs and row kinds");
  }
  for (const auto& row : constraint_matrix) {
    if (row.size() != n) throw StructuralError("LP row width does not match objective length");
    for (double v : row) {
      if (!std::isfinite(v)) throw InputError("LP matrix has non-finite entries");
    }
  }
  for (double v : objective) {
    if (!std::isfinite(v)) throw InputError("LP objective has non-finite entries");
  }
  for (double v : rhs) {
    if (!std::isfinite(v)) throw InputError("LP rhs has non-finite entries");
  }
  if (!lower.empty()) {
    if (lower.size() != n) throw StructuralError("LP lower bound length mismatch");
    for (double v : lower) {
      if (v != 0.0 && v != -kInf) throw StructuralError("LP lower bounds must be 0 or -inf");
    }
  }
  if (!upper.empty()) {
    if (upper.size() != n) throw StructuralError("LP upper bound length mismatch");
    for (std::size_t j = 0; j < n; ++j) {
      const double lo = lower.empty() ? 0.0 : lower[j];
      if (std::isnan(upper[j]) || upper[j] == -kInf || upper[j] < lo) {
        throw StructuralError("LP upper bound below lower bound");
      }
    }
  }
}

// Internal form: min cost^T u, T u = b (b >= 0), u >= 0. Free user variables
// are split into two columns, finite upper bounds become extra <= rows.
struct SimplexSolver::Layout {
  std::size_t user_vars = 0;
  std::size_t user_rows = 0;
  std::vector<std::size_t> pos_col;
  std::vector<std::size_t> neg_col;
  std::vector<std::size_t> slack_col;
  std::size_t first_artificial = 0;
  std::size_t total = 0;
  Vector cost;
  Vector row_sign;
  std::vector<std::size_t> init_col;
  double cost_sign = 1.0;
};

void SimplexSolver::pivot(std::size_t row, std::size_t col) {
  double* prow = &tableau_[row * width_];
  const double inv = 1.0 / prow[col];
  for (std::size_t c = 0; c < width_; ++c) prow[c] *= inv;
  prow[col] = 1.0;
  for (std::size_t r = 0; r <= rows_; ++r) {
    if (r == row) continue;
    double* other = &tableau_[r * width_];
    const double factor = other[col];
    if (factor == 0.0) continue;
    for (std::size_t c = 0; c < width_; ++c) other[c] -= factor * prow[c];
    other[col] = 0.0;
  }
  basis_[row] = col;
  ++pivots_;
}

void SimplexSolver::price_out(const Vector& costs) {
  const std::size_t rhs = width_ - 1;
  for (std::size_t c = 0; c < rhs; ++c) at(rows_, c) = costs[c];
  at(rows_, rhs) = 0.0;
  for (std::size_t r = 0; r < rows_; ++r) {
    const double cb = costs[basis_[r]];
    if (cb == 0.0) continue;
    for (std::size_t c = 0; c < width_; ++c) at(rows_, c) -= cb * at(r, c);
  }
}

void SimplexSolver::refactor(const Vector& costs) {
  // Gauss-Jordan with partial pivoting on [B | original].
  const std::size_t n = rows_;
  std::vector<double> work(n * (n + width_));
  const std::size_t stride = n + width_;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < n; ++k) work[r * stride + k] = original_[r * width_ + basis_[k]];
    for (std::size_t c = 0; c < width_; ++c) work[r * stride + n + c] = original_[r * width_ + c];
  }
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t r = k + 1; r < n; ++r) {
      if (std::abs(work[r * stride + k]) > std::abs(work[p * stride + k])) p = r;
    }
    if (std::abs(work[p * stride + k]) < 1e-11) {
      throw LpError(LpError::Kind::numerical, "simplex basis became singular");
    }
    if (p != k) {
      for (std::size_t c = 0; c < stride; ++c) std::swap(work[p * stride + c], work[k * stride + c]);
    }
    double* prow = &work[k * stride];
    const double inv = 1.0 / prow[k];
    for (std::size_t c = k; c < stride; ++c) prow[c] *= inv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == k) continue;
      double* other = &work[r * stride];
      const double f = other[k];
      if (f == 0.0) continue;
      for (std::size_t c = k; c < stride; ++c) other[c] -= f * prow[c];
    }
  }
  // Row k of the result now belongs to basis_[k].
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < width_; ++c) at(r, c) = work[r * stride + n + c];
    for (std::size_t k = 0; k < n; ++k) at(r, basis_[k]) = r == k ? 1.0 : 0.0;
  }
  price_out(costs);
}

bool SimplexSolver::run_phase(const Layout& layout, const Vector& costs) {
  const std::size_t rhs = width_ - 1;
  const std::size_t entering_limit = layout.first_artificial;
  const std::size_t max_pivots = pivots_ + 50 * (rows_ + width_) + 10000;
  const std::size_t refactor_every = 64;
  // Dantzig pricing; a long run of degenerate pivots switches to Bland's
  // rule until the objective moves again.
  const std::size_t bland_after = std::max<std::size_t>(50, rows_ / 2);
  std::size_t degenerate = 0;
  std::size_t since_refactor = 0;
  bool fresh = true;
  while (true) {
    if (pivots_ > max_pivots) throw LpError(LpError::Kind::numerical, "simplex pivot limit reached");
    const bool bland = degenerate >= bland_after;
    std::size_t enter = kNone;
    double most = -tol::kLpReducedCost;
    for (std::size_t c = 0; c < entering_limit; ++c) {
      const double rc = at(rows_, c);
      if (rc < most) {
        enter = c;
        if (bland) break;
        most = rc;
      }
    }
    if (enter == kNone) {
      // confirm on a clean tableau before declaring optimality
      if (fresh) return true;
      refactor(costs);
      since_refactor = 0;
      fresh = true;
      continue;
    }

    // Harris two-pass ratio test: the largest step any row allows with a
    // small feasibility slack, then the biggest pivot among rows within it.
    double step = kInf;
    for (std::size_t r = 0; r < rows_; ++r) {
      const double a = at(r, enter);
      if (a > tol::kLpPivot) step = std::min(step, (std::max(0.0, at(r, rhs)) + tol::kLpFeasibility) / a);
    }
    if (step == kInf) {
      if (!fresh) {
        refactor(costs);
        since_refactor = 0;
        fresh = true;
        continue;
      }
      unbounded_column_ = enter;
      return false;
    }
    std::size_t leave = kNone;
    for (std::size_t r = 0; r < rows_; ++r) {
      const double a = at(r, enter);
      if (a <= tol::kLpPivot || std::max(0.0, at(r, rhs)) / a > step) continue;
      if (leave == kNone) {
        leave = r;
      } else if (bland ? basis_[r] < basis_[leave] : a > at(leave, enter)) {
        leave = r;
      }
    }
    const double moved = std::max(0.0, at(leave, rhs)) / at(leave, enter);
    degenerate = moved * std::abs(at(rows_, enter)) <= 1e-13 ? degenerate + 1 : 0;
    pivot(leave, enter);
    fresh = false;
    if (++since_refactor >= refactor_every) {
      refactor(costs);
      since_refactor = 0;
      fresh = true;
    }
  }
}

void SimplexSolver::perturb(const Vector& costs) {
  // b += B delta shifts every basic value up by delta.
  const std::size_t rhs = width_ - 1;
  true_rhs_.resize(rows_);
  for (std::size_t r = 0; r < rows_; ++r) true_rhs_[r] = original_[r * width_ + rhs];
  std::mt19937_64 rng(0x6d617267696eULL);
  std::uniform_real_distribution<double> unit(1.0, 2.0);
  for (std::size_t k = 0; k < rows_; ++k) {
    const double delta = 1e-7 * unit(rng) * (1.0 + std::abs(at(k, rhs)));
    const std::size_t c = basis_[k];
    for (std::size_t r = 0; r < rows_; ++r) original_[r * width_ + rhs] += delta * original_[r * width_ + c];
  }
  perturbed_ = true;
  refactor(costs);
}

void SimplexSolver::unperturb(const Layout& layout, const Vector& costs) {
  if (!perturbed_) return;
  const std::size_t rhs = width_ - 1;
  for (std::size_t r = 0; r < rows_; ++r) original_[r * width_ + rhs] = true_rhs_[r];
  perturbed_ = false;
  refactor(costs);

  // Dual simplex: the basis stays dual feasible, repair the few basic
  // values the perturbation pushed across zero.
  const std::size_t limit = pivots_ + 10 * rows_ + 1000;
  std::size_t since_refactor = 0;
  while (true) {
    std::size_t leave = kNone;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (at(r, rhs) < -tol::kLpFeasibility && (leave == kNone || at(r, rhs) < at(leave, rhs))) leave = r;
    }
    if (leave == kNone) break;
    if (pivots_ > limit) throw LpError(LpError::Kind::numerical, "dual simplex repair did not finish");
    std::size_t enter = kNone;
    double best = kInf;
    for (std::size_t c = 0; c < layout.first_artificial; ++c) {
      const double a = at(leave, c);
      if (a >= -tol::kLpPivot) continue;
      const double ratio = std::max(0.0, at(rows_, c)) / -a;
      if (ratio < best - 1e-12 || (ratio <= best + 1e-12 && enter != kNone && -a > -at(leave, enter))) {
        best = std::min(best, ratio);
        enter = c;
      }
    }
    if (enter == kNone) throw LpError(LpError::Kind::numerical, "dual simplex repair found no entering column");
    pivot(leave, enter);
    if (++since_refactor >= 64) {
      refactor(costs);
      since_refactor = 0;
    }
  }
  if (since_refactor > 0) refactor(costs);
}

bool SimplexSolver::try_warm_start(const Layout& layout, const std::vector<BasisEntry>& warm) {
  if (warm.size() != rows_) return false;
  std::vector<std::size_t> cols;
  std::vector<char> used(layout.total, 0);
  for (const auto& e : warm) {
    std::size_t c = kNone;
    switch (e.kind) {
      case BasisEntry::Kind::positive:
        if (e.index < layout.user_vars) c = layout.pos_col[e.index];
        break;
      case BasisEntry::Kind::negative:
        if (e.index < layout.user_vars) c = layout.neg_col[e.index];
        break;
      case BasisEntry::Kind::slack:
        if (e.index < rows_) c = layout.slack_col[e.index];
        break;
      case BasisEntry::Kind::artificial:
        return false;
    }
    if (c == kNone || used[c]) return false;
    used[c] = 1;
    cols.push_back(c);
  }
  const std::vector<std::size_t> cold = basis_;
  basis_ = cols;
  try {
    refactor(Vector(layout.total, 0.0));
  } catch (const LpError&) {
    basis_ = cold;
    refactor(Vector(layout.total, 0.0));
    return false;
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    if (at(r, width_ - 1) < -tol::kLpFeasibility) {
      basis_ = cold;
      refactor(Vector(layout.total, 0.0));
      return false;
    }
  }
  return true;
}

LpSolution SimplexSolver::solve(const StandardLp& lp, const std::vector<BasisEntry>& warm) {
  lp.validate();
  Layout layout;
  layout.user_vars = lp.variables();
  layout.user_rows = lp.rows();
  layout.cost_sign = lp.sense == Sense::minimize ? 1.0 : -1.0;

  std::size_t col = 0;
  layout.pos_col.resize(layout.user_vars);
  layout.neg_col.assign(layout.user_vars, kNone);
  for (std::size_t j = 0; j < layout.user_vars; ++j) {
    layout.pos_col[j] = col++;
    if (!lp.lower.empty() && lp.lower[j] == -kInf) layout.neg_col[j] = col++;
  }
  const std::size_t structural = col;

  // Internal rows: user rows then finite upper bounds.
  struct Row {
    Vector coeffs;  // over structural columns
    double rhs;
    RowKind kind;
  };
  std::vector<Row> rows;
  rows.reserve(lp.rows());
  for (std::size_t i = 0; i < lp.rows(); ++i) {
    Row r{Vector(structural, 0.0), lp.rhs[i], lp.row_kinds[i]};
    for (std::size_t j = 0; j < layout.user_vars; ++j) {
      const double a = lp.constraint_matrix[i][j];
      r.coeffs[layout.pos_col[j]] = a;
      if (layout.neg_col[j] != kNone) r.coeffs[layout.neg_col[j]] = -a;
    }
    rows.push_back(std::move(r));
  }
  if (!lp.upper.empty()) {
    for (std::size_t j = 0; j < layout.user_vars; ++j) {
      if (lp.upper[j] == kInf) continue;
      Row r{Vector(structural, 0.0), lp.upper[j], RowKind::less_equal};
      r.coeffs[layout.pos_col[j]] = 1.0;
      if (layout.neg_col[j] != kNone) r.coeffs[layout.neg_col[j]] = -1.0;
      rows.push_back(std::move(r));
    }
  }
  rows_ = rows.size();

  layout.slack_col.assign(rows_, kNone);
  std::vector<double> slack_coef(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    if (rows[i].kind == RowKind::equal) continue;
    layout.slack_col[i] = col++;
    slack_coef[i] = rows[i].kind == RowKind::less_equal ? 1.0 : -1.0;
  }
  layout.row_sign.assign(rows_, 1.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    if (rows[i].rhs < 0.0) layout.row_sign[i] = -1.0;
  }
  layout.first_artificial = col;
  layout.init_col.assign(rows_, kNone);
  for (std::size_t i = 0; i < rows_; ++i) {
    if (layout.slack_col[i] != kNone && slack_coef[i] * layout.row_sign[i] > 0.0) {
      layout.init_col[i] = layout.slack_col[i];
    } else {
      layout.init_col[i] = col++;
    }
  }
  layout.total = col;
  width_ = layout.total + 1;

  tableau_.assign((rows_ + 1) * width_, 0.0);
  basis_.assign(rows_, kNone);
  pivots_ = 0;
  perturbed_ = false;
  for (std::size_t i = 0; i < rows_; ++i) {
    const double s = layout.row_sign[i];
    for (std::size_t c = 0; c < structural; ++c) at(i, c) = s * rows[i].coeffs[c];
    if (layout.slack_col[i] != kNone) at(i, layout.slack_col[i]) = s * slack_coef[i];
    at(i, layout.init_col[i]) = 1.0;
    at(i, width_ - 1) = s * rows[i].rhs;
    basis_[i] = layout.init_col[i];
  }
  original_.assign(tableau_.begin(), tableau_.begin() + static_cast<std::ptrdiff_t>(rows_ * width_));

  layout.cost.assign(layout.total, 0.0);
  for (std::size_t j = 0; j < layout.user_vars; ++j) {
    const double c = layout.cost_sign * lp.objective[j];
    layout.cost[layout.pos_col[j]] = c;
    if (layout.neg_col[j] != kNone) layout.cost[layout.neg_col[j]] = -c;
  }

  auto row_duals = [&](const Vector& costs) {
    Vector y(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      const std::size_t c = layout.init_col[i];
      y[i] = costs[c] - at(rows_, c);
    }
    return y;
  };

  const bool warm_ok = !warm.empty() && try_warm_start(layout, warm);
  bool needs_phase1 = false;
  if (!warm_ok) {
    for (std::size_t c : basis_) needs_phase1 = needs_phase1 || c >= layout.first_artificial;
  }

  if (needs_phase1) {
    Vector phase1(layout.total, 0.0);
    for (std::size_t c = layout.first_artificial; c < layout.total; ++c) phase1[c] = 1.0;
    perturb(phase1);
    run_phase(layout, phase1);
    double scale = 1.0;
    for (const auto& r : rows) scale = std::max(scale, std::abs(r.rhs));
    if (-at(rows_, width_ - 1) > tol::kLpFeasibility * scale) {
      // might be an artefact of the perturbation; retry on the true rhs
      const std::size_t rhs = width_ - 1;
      for (std::size_t r = 0; r < rows_; ++r) original_[r * width_ + rhs] = true_rhs_[r];
      perturbed_ = false;
      refactor(phase1);
      run_phase(layout, phase1);
    }
    const double infeasibility = -at(rows_, width_ - 1);
    if (infeasibility > tol::kLpFeasibility * scale) {
      Vector y = row_duals(phase1);
      Vector cert(layout.user_rows);
      for (std::size_t i = 0; i < layout.user_rows; ++i) cert[i] = layout.row_sign[i] * y[i];
      throw LpError(LpError::Kind::infeasible,
                    "LP is infeasible (phase-1 residual " + std::to_string(infeasibility) + ")",
                    std::move(cert));
    }
    for (std::size_t r = 0; r < rows_; ++r) {
      if (basis_[r] < layout.first_artificial) continue;
      std::size_t best = kNone;
      for (std::size_t c = 0; c < layout.first_artificial; ++c) {
        if (std::abs(at(r, c)) > tol::kLpPivot &&
            (best == kNone || std::abs(at(r, c)) > std::abs(at(r, best)))) {
          best = c;
        }
      }
      // A row with no structural entry is redundant; its artificial stays basic.
      if (best != kNone) pivot(r, best);
    }
    refactor(layout.cost);
    // driving artificials out can leave tiny negative values behind
    unperturb(layout, layout.cost);
    perturb(layout.cost);
  } else {
    perturb(layout.cost);
  }

  if (!run_phase(layout, layout.cost)) {
    Vector direction(layout.total, 0.0);
    direction[unbounded_column_] = 1.0;
    for (std::size_t r = 0; r < rows_; ++r) direction[basis_[r]] = -at(r, unbounded_column_);
    Vector ray(layout.user_vars);
    for (std::size_t j = 0; j < layout.user_vars; ++j) {
      ray[j] = direction[layout.pos_col[j]];
      if (layout.neg_col[j] != kNone) ray[j] -= direction[layout.neg_col[j]];
    }
    throw LpError(LpError::Kind::unbounded, "LP is unbounded", std::move(ray));
  }
  unperturb(layout, layout.cost);
  if (!run_phase(layout, layout.cost)) {
    throw LpError(LpError::Kind::numerical, "LP became unbounded after removing the perturbation");
  }

  Vector u(layout.total, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) u[basis_[r]] = std::max(0.0, at(r, width_ - 1));

  LpSolution out;
  out.x.resize(layout.user_vars);
  for (std::size_t j = 0; j < layout.user_vars; ++j) {
    out.x[j] = u[layout.pos_col[j]];
    if (layout.neg_col[j] != kNone) out.x[j] -= u[layout.neg_col[j]];
  }
  out.value = dot(lp.objective, out.x);
  const Vector y = row_duals(layout.cost);
  out.duals.resize(layout.user_rows);
  for (std::size_t i = 0; i < layout.user_rows; ++i) {
    out.duals[i] = layout.cost_sign * layout.row_sign[i] * y[i];
  }
  out.pivots = pivots_;
  out.warm_started = warm_ok;

  std::vector<BasisEntry> by_col(layout.total);
  for (std::size_t j = 0; j < layout.user_vars; ++j) {
    by_col[layout.pos_col[j]] = {BasisEntry::Kind::positive, j};
    if (layout.neg_col[j] != kNone) by_col[layout.neg_col[j]] = {BasisEntry::Kind::negative, j};
  }
  for (std::size_t i = 0; i < rows_; ++i) {
    if (layout.slack_col[i] != kNone) by_col[layout.slack_col[i]] = {BasisEntry::Kind::slack, i};
    if (layout.init_col[i] >= layout.first_artificial) by_col[layout.init_col[i]] = {BasisEntry::Kind::artificial, i};
  }
  for (std::size_t c : basis_) out.basis.push_back(by_col[c]);
  return out;
}

LpSolution solve_lp(const StandardLp& lp) {
  SimplexSolver solver;
  return solver.solve(lp);
}

namespace {

// Variables: rho (free), xi_0..xi_{m-1}, w_0..w_{t-1}; appending columns
// keeps earlier variable indices, so bases carry over.
StandardLp soft_margin_lp(const GainMatrix& a, double nu) {
  const std::size_t m = a.rows();
  const std::size_t t = a.cols();
  const std::size_t n = 1 + m + t;
  StandardLp lp;
  lp.sense = Sense::maximize;
  lp.objective.assign(n, 0.0);
  lp.objective[0] = 1.0;
  for (std::size_t i = 0; i < m; ++i) lp.objective[1 + i] = -1.0 / nu;
  lp.lower.assign(n, 0.0);
  lp.lower[0] = -kInf;

  // rho - xi_i - (A w)_i <= 0 for every example.
  for (std::size_t i = 0; i < m; ++i) {
    Vector row(n, 0.0);
    row[0] = 1.0;
    row[1 + i] = -1.0;
    for (std::size_t k = 0; k < t; ++k) row[1 + m + k] = -a.at(i, k);
    lp.constraint_matrix.push_back(std::move(row));
    lp.rhs.push_back(0.0);
    lp.row_kinds.push_back(RowKind::less_equal);
  }
  Vector simplex_row(n, 0.0);
  for (std::size_t k = 0; k < t; ++k) simplex_row[1 + m + k] = 1.0;
  lp.constraint_matrix.push_back(std::move(simplex_row));
  lp.rhs.push_back(1.0);
  lp.row_kinds.push_back(RowKind::equal);
  return lp;
}

EdgeMinSolution read_edge_min(const GainMatrix& a, double nu, const LpSolution& sol) {
  const std::size_t m = a.rows();
  const std::size_t t = a.cols();
  EdgeMinSolution out;
  out.pivots = sol.pivots;
  out.d.weights.assign(m, 0.0);
  double mass = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double v = sol.duals[i];
    if (v < 0.0) {
      if (v < -tol::kLpDualClip) {
        throw LpError(LpError::Kind::numerical, "edge-min LP returned a negative distribution entry");
      }
      v = 0.0;
    }
    out.d.weights[i] = v;
    mass += v;
  }
  if (!(mass > 0.0)) throw LpError(LpError::Kind::numerical, "edge-min LP returned zero mass");
  for (double& v : out.d.weights) v = std::min(v / mass, 1.0 / nu);

  for (std::size_t k = 0; k < t; ++k) {
    const double v = sol.x[1 + m + k];
    if (v > 0.0) out.w.coeffs[k] = v;
  }
  out.w.normalize();

  const Vector e = edges(a, out.d);
  out.gamma = *std::max_element(e.begin(), e.end());
  out.rho = capped_min_linear(margins(a, out.w), nu).value;
  return out;
}

}  // namespace

EdgeMinSolution solve_edge_min(const GainMatrix& a, double nu) {
  EdgeMinSolver solver;
  return solver.solve(a, nu);
}

EdgeMinSolution EdgeMinSolver::solve(const GainMatrix& a, double nu) {
  if (a.cols() == 0) throw StructuralError("solve_edge_min needs at least one column");
  check_nu(a.rows(), nu);
  if (a.rows() != rows_ || nu != nu_) basis_.clear();
  SimplexSolver simplex;
  const LpSolution sol = simplex.solve(soft_margin_lp(a, nu), basis_);
  basis_ = sol.basis;
  rows_ = a.rows();
  nu_ = nu;
  return read_edge_min(a, nu, sol);
}

}  // namespace marginforge
