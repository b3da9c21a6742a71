#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "marginforge/core.hpp"

namespace marginforge {

enum class RowKind { less_equal, equal, greater_equal };
enum class Sense { minimize, maximize };

/// Dense LP:  optimize objective^T x  s.t.  row_i(x) (<=|=|>=) rhs_i,
/// lower_j <= x_j <= upper_j  with lower_j in {0, -inf}.
struct StandardLp {
  Sense sense = Sense::minimize;
  Vector objective;
  std::vector<Vector> constraint_matrix;
  Vector rhs;
  std::vector<RowKind> row_kinds;
  /// Empty means all zero.
  Vector lower;
  /// Empty means all +inf.
  Vector upper;

  std::size_t variables() const { return objective.size(); }
  std::size_t rows() const { return rhs.size(); }
  /// Throws StructuralError on inconsistent dimensions or bad bounds.
  void validate() const;
};

/// A basic column named so that it survives appending variables to the LP.
struct BasisEntry {
  enum class Kind { positive, negative, slack, artificial };
  Kind kind = Kind::positive;
  /// User variable for positive / negative parts, internal row otherwise.
  std::size_t index = 0;
  bool operator==(const BasisEntry&) const = default;
};

struct LpSolution {
  Vector x;
  double value = 0.0;
  /// Shadow price d(value)/d(rhs_i) for every user row.
  Vector duals;
  std::size_t pivots = 0;
  /// Final basis, usable as a warm start for a related LP.
  std::vector<BasisEntry> basis;
  bool warm_started = false;
};

class LpError : public Error {
 public:
  enum class Kind { infeasible, unbounded, numerical };

  LpError(Kind kind, const std::string& what, Vector certificate = {})
      : Error(what), kind_(kind), certificate_(std::move(certificate)) {}

  Kind kind() const { return kind_; }
  /// infeasible: Farkas multipliers over the rows; unbounded: improving ray in x.
  const Vector& certificate() const { return certificate_; }

 private:
  Kind kind_;
  Vector certificate_;
};

/// Two-phase dense tableau simplex. Dantzig pricing with a Harris ratio
/// test, Bland's rule after long degenerate runs, and a tiny perturbation
/// of the basic solution that is removed (with dual simplex repair) before
/// returning. A solver owns its tableau; use one instance per thread.
class SimplexSolver {
 public:
  /// `warm`: a basis from a previous solve with the same rows; ignored when
  /// it does not yield a feasible start.
  LpSolution solve(const StandardLp& lp, const std::vector<BasisEntry>& warm = {});

 private:
  struct Layout;

  void pivot(std::size_t row, std::size_t col);
  void price_out(const Vector& costs);
  // Rebuilds the tableau from the original rows for the current basis.
  void refactor(const Vector& costs);
  bool run_phase(const Layout& layout, const Vector& costs);
  void perturb(const Vector& costs);
  void unperturb(const Layout& layout, const Vector& costs);
  bool try_warm_start(const Layout& layout, const std::vector<BasisEntry>& warm);
  double at(std::size_t r, std::size_t c) const { return tableau_[r * width_ + c]; }
  double& at(std::size_t r, std::size_t c) { return tableau_[r * width_ + c]; }

  std::vector<double> tableau_;   // (rows + 1) x width, last row = reduced costs
  std::vector<double> original_;  // rows x width before any pivot (rhs possibly perturbed)
  Vector true_rhs_;
  bool perturbed_ = false;
  std::size_t rows_ = 0;
  std::size_t width_ = 0;  // columns + rhs
  std::vector<std::size_t> basis_;
  std::size_t pivots_ = 0;
  std::size_t unbounded_column_ = 0;
};

LpSolution solve_lp(const StandardLp& lp);

/// Optimal pair of the edge-minimization LP over the discovered columns,
/// min_{d in capped simplex} max_k (d^T A)_k, and its dual, the soft-margin
/// LP max_{w in simplex} min_d d^T A w.
struct EdgeMinSolution {
  Distribution d;
  /// max_k (d^T A)_k evaluated at the returned d.
  double gamma = 0.0;
  EnsembleWeights w;
  /// min_d d^T A w evaluated at the returned w.
  double rho = 0.0;
  std::size_t pivots = 0;
};

/// Solves the soft-margin LP (m + 1 rows) and reads d from its row duals.
EdgeMinSolution solve_edge_min(const GainMatrix& a, double nu);

/// solve_edge_min for a growing column set: each solve starts from the
/// previous optimal basis when the rows and nu are unchanged.
class EdgeMinSolver {
 public:
  EdgeMinSolution solve(const GainMatrix& a, double nu);

 private:
  std::vector<BasisEntry> basis_;
  std::size_t rows_ = 0;
  double nu_ = 0.0;
};

}  // namespace marginforge
