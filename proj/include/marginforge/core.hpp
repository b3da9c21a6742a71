#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace marginforge {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape or index violation (mismatched lengths, unknown column index).
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Malformed or non-finite user input.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters (nu outside [1, m], empty pool, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

using Vector = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);

/// Labelled examples with dense features stored row-major.
class Dataset {
 public:
  Dataset(std::vector<double> features, std::size_t feature_count, std::vector<int> labels);

  std::size_t size() const { return labels_.size(); }
  std::size_t feature_count() const { return feature_count_; }

  std::span<const double> row(std::size_t i) const {
    return {features_.data() + i * feature_count_, feature_count_};
  }
  double feature(std::size_t i, std::size_t j) const { return features_[i * feature_count_ + j]; }
  int label(std::size_t i) const { return labels_[i]; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<double>& features() const { return features_; }

 private:
  std::vector<double> features_;
  std::size_t feature_count_;
  std::vector<int> labels_;
};

/// Soft-margin capping and smoothing parameters.
///
/// The capped simplex is {d in [0, 1/nu]^m : sum d = 1}. The smoothing
/// parameter eta weights the relative entropy by 1/eta; choosing
/// eta = 2 ln(m/nu) / eps keeps the smoothed conjugate within eps/2 of the
/// unsmoothed one.
struct CapParams {
  double nu = 1.0;
  std::size_t m = 1;
  double eta = 1.0;
  double eps = 0.0;

  /// eta = 2 ln(m/nu) / eps, floored at tol::kEtaFloor when nu = m.
  static CapParams from_tolerance(std::size_t m, double nu, double eps);
  /// Explicit eta; eps is back-computed (0 when nu = m).
  static CapParams with_eta(std::size_t m, double nu, double eta);

  double cap() const { return 1.0 / nu; }
  /// ln(m/nu), the largest relative entropy attainable on the capped simplex.
  double entropy_bound() const;
  /// True when the capped simplex is the single point uniform(m).
  bool singleton() const;
};

void check_nu(std::size_t m, double nu);

/// A point of the capped simplex: the booster's weighting of the examples.
struct Distribution {
  Vector weights;

  static Distribution uniform(std::size_t m);
  std::size_t size() const { return weights.size(); }
  /// Membership in the capped simplex at the tolerances of tol::kSimplexSum
  /// and tol::kCapOvershoot.
  bool is_valid(double nu) const;
};

/// Sparse convex combination over the discovered columns. Keys are column
/// indices of a GainMatrix; every stored value is positive.
struct EnsembleWeights {
  std::map<std::size_t, double> coeffs;

  static EnsembleWeights point_mass(std::size_t column);
  /// Uniform over columns [0, count).
  static EnsembleWeights uniform(std::size_t count);

  bool empty() const { return coeffs.empty(); }
  double at(std::size_t column) const;
  double sum() const;
  Vector dense(std::size_t columns) const;
  bool is_valid() const;
  /// Drops entries below tol::kSupportDrop and rescales to sum 1.
  void normalize();
};

using HypothesisId = std::size_t;

/// The gain matrix A = (y_i h_j(x_i)) restricted to the hypotheses found so
/// far. Columns are kept in discovery order; a hypothesis that is already
/// present (same id, or identical column) reuses its existing index.
class GainMatrix {
 public:
  explicit GainMatrix(std::size_t rows) : rows_(rows) {}

  /// Every column gets the id equal to its position.
  static GainMatrix from_columns(std::vector<Vector> columns);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return columns_.size(); }

  /// Appends `column` unless it is already present; returns its index.
  std::size_t add_column(Vector column, HypothesisId id);
  /// Index of a column with this id, or cols() when absent.
  std::size_t find(HypothesisId id) const;

  const Vector& column(std::size_t k) const { return columns_.at(k); }
  HypothesisId id(std::size_t k) const { return ids_.at(k); }
  const std::vector<HypothesisId>& ids() const { return ids_; }
  double at(std::size_t i, std::size_t k) const { return columns_[k][i]; }

 private:
  std::size_t rows_;
  std::vector<Vector> columns_;
  std::vector<HypothesisId> ids_;
  std::map<HypothesisId, std::size_t> by_id_;
};

/// A w: the per-example margins of the combined hypothesis.
Vector margins(const GainMatrix& a, const EnsembleWeights& w);

/// d^T A: the edge of every discovered column under d.
Vector edges(const GainMatrix& a, const Distribution& d);

/// sum_i d_i ln d_i + ln m, with 0 ln 0 = 0.
double relative_entropy(std::span<const double> d);
inline double relative_entropy(const Distribution& d) { return relative_entropy(d.weights); }

}  // namespace marginforge
