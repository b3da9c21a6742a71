#include "marginforge/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "marginforge/constants.hpp"

namespace marginforge {

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw StructuralError("dot: length mismatch " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Dataset::Dataset(std::vector<double> features, std::size_t feature_count, std::vector<int> labels)
    : features_(std::move(features)), feature_count_(feature_count), labels_(std::move(labels)) {
  if (labels_.empty()) throw InputError("dataset has no examples");
  if (feature_count_ == 0) throw InputError("dataset has no features");
  if (features_.size() != labels_.size() * feature_count_) {
    throw StructuralError("feature matrix size does not match m * p");
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] != 1 && labels_[i] != -1) {
      throw InputError("label of example " + std::to_string(i) + " is not -1 or +1");
    }
  }
  for (double v : features_) {
    if (!std::isfinite(v)) throw InputError("non-finite feature value");
  }
}

void check_nu(std::size_t m, double nu) {
  if (m == 0) throw ConfigError("m must be positive");
  if (!(nu >= 1.0) || !(nu <= static_cast<double>(m))) {
    throw ConfigError("nu must lie in [1, m]; got " + std::to_string(nu) + " with m = " +
                      std::to_string(m));
  }
}

CapParams CapParams::from_tolerance(std::size_t m, double nu, double eps) {
  check_nu(m, nu);
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  CapParams p;
  p.nu = nu;
  p.m = m;
  p.eps = eps;
  p.eta = std::max(2.0 * std::log(static_cast<double>(m) / nu) / eps, tol::kEtaFloor);
  return p;
}

CapParams CapParams::with_eta(std::size_t m, double nu, double eta) {
  check_nu(m, nu);
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be positive and finite");
  CapParams p;
  p.nu = nu;
  p.m = m;
  p.eta = eta;
  p.eps = 2.0 * std::log(static_cast<double>(m) / nu) / eta;
  return p;
}

double CapParams::entropy_bound() const { return std::log(static_cast<double>(m) / nu); }

bool CapParams::singleton() const {
  return nu >= static_cast<double>(m) * (1.0 - tol::kCapRelativeSlack);
}

Distribution Distribution::uniform(std::size_t m) {
  return Distribution{Vector(m, 1.0 / static_cast<double>(m))};
}

bool Distribution::is_valid(double nu) const {
  if (weights.empty()) return false;
  const double cap = 1.0 / nu + tol::kCapOvershoot;
  double s = 0.0;
  for (double v : weights) {
    if (!(v >= 0.0) || v > cap) return false;
    s += v;
  }
  return std::abs(s - 1.0) <= tol::kSimplexSum;
}

EnsembleWeights EnsembleWeights::point_mass(std::size_t column) {
  EnsembleWeights w;
  w.coeffs[column] = 1.0;
  return w;
}

EnsembleWeights EnsembleWeights::uniform(std::size_t count) {
  EnsembleWeights w;
  for (std::size_t k = 0; k < count; ++k) w.coeffs[k] = 1.0 / static_cast<double>(count);
  return w;
}

double EnsembleWeights::at(std::size_t column) const {
  auto it = coeffs.find(column);
  return it == coeffs.end() ? 0.0 : it->second;
}

double EnsembleWeights::sum() const {
  double s = 0.0;
  for (const auto& [k, v] : coeffs) s += v;
  return s;
}

Vector EnsembleWeights::dense(std::size_t columns) const {
  Vector out(columns, 0.0);
  for (const auto& [k, v] : coeffs) {
    if (k >= columns) throw StructuralError("ensemble index " + std::to_string(k) + " out of range");
    out[k] = v;
  }
  return out;
}

bool EnsembleWeights::is_valid() const {
  if (coeffs.empty()) return false;
  for (const auto& [k, v] : coeffs) {
    if (!(v > 0.0)) return false;
  }
  return std::abs(sum() - 1.0) <= tol::kSimplexSum;
}

void EnsembleWeights::normalize() {
  std::erase_if(coeffs, [](const auto& kv) { return !(kv.second >= tol::kSupportDrop); });
  const double s = sum();
  if (coeffs.empty() || !(s > 0.0)) throw StructuralError("ensemble weights have no mass");
  for (auto& [k, v] : coeffs) v /= s;
}

GainMatrix GainMatrix::from_columns(std::vector<Vector> columns) {
  if (columns.empty()) throw StructuralError("gain matrix needs at least one column");
  GainMatrix a(columns.front().size());
  for (auto& c : columns) {
    if (c.size() != a.rows_) throw StructuralError("columns have different lengths");
    a.by_id_[a.columns_.size()] = a.columns_.size();
    a.ids_.push_back(a.columns_.size());
    a.columns_.push_back(std::move(c));
  }
  return a;
}

std::size_t GainMatrix::find(HypothesisId id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? cols() : it->second;
}

std::size_t GainMatrix::add_column(Vector column, HypothesisId id) {
  if (column.size() != rows_) {
    throw StructuralError("column length " + std::to_string(column.size()) + " != rows " +
                          std::to_string(rows_));
  }
  for (double v : column) {
    if (!(v >= -1.0 && v <= 1.0)) throw InputError("gain entries must lie in [-1, 1]");
  }
  if (auto k = find(id); k != cols()) return k;
  for (std::size_t k = 0; k < columns_.size(); ++k) {
    if (columns_[k] == column) return k;
  }
  by_id_[id] = columns_.size();
  ids_.push_back(id);
  columns_.push_back(std::move(column));
  return columns_.size() - 1;
}

Vector margins(const GainMatrix& a, const EnsembleWeights& w) {
  Vector out(a.rows(), 0.0);
  for (const auto& [k, v] : w.coeffs) {
    if (k >= a.cols()) {
      throw StructuralError("ensemble index " + std::to_string(k) + " out of range (" +
                            std::to_string(a.cols()) + " columns)");
    }
    const Vector& col = a.column(k);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += v * col[i];
  }
  return out;
}

Vector edges(const GainMatrix& a, const Distribution& d) {
  if (d.size() != a.rows()) {
    throw StructuralError("distribution length " + std::to_string(d.size()) + " != rows " +
                          std::to_string(a.rows()));
  }
  Vector out(a.cols());
  for (std::size_t k = 0; k < a.cols(); ++k) out[k] = dot(d.weights, a.column(k));
  return out;
}

double relative_entropy(std::span<const double> d) {
  double s = std::log(static_cast<double>(d.size()));
  for (double v : d) {
    if (v > tol::kEntropyZero) s += v * std::log(v);
  }
  return std::max(0.0, s);
}

}  // namespace marginforge
