#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "marginforge/core.hpp"

namespace marginforge {

/// h(x) = polarity if x[feature] >= threshold else -polarity.
struct StumpHypothesis {
  std::size_t feature = 0;
  double threshold = 0.0;
  int polarity = 1;

  int predict(std::span<const double> x) const {
    return x[feature] >= threshold ? polarity : -polarity;
  }
  bool operator==(const StumpHypothesis&) const = default;
};

/// y_i h(x_i) for every example.
Vector gain_column(const Dataset& data, const StumpHypothesis& h);

/// All stumps over a dataset: per feature, thresholds below the minimum, at
/// midpoints of consecutive distinct values and above the maximum, each with
/// both polarities. Candidates are ordered by (feature, threshold,
/// polarity +1 first), which is also the tie-breaking order.
class StumpPool {
 public:
  StumpPool() = default;
  explicit StumpPool(const Dataset& data);

  const std::vector<StumpHypothesis>& candidates() const { return candidates_; }
  std::size_t size() const { return candidates_.size(); }
  bool empty() const { return candidates_.empty(); }
  std::size_t feature_count() const { return features_.size(); }

  struct FeatureSweep {
    // Examples sorted by feature value; group_end[q] is one past the last
    // example whose value equals the q-th distinct value.
    std::vector<std::size_t> order;
    std::vector<std::size_t> group_end;
    std::size_t first_candidate = 0;
  };
  const std::vector<FeatureSweep>& sweeps() const { return features_; }

 private:
  std::vector<StumpHypothesis> candidates_;
  std::vector<FeatureSweep> features_;
};

struct StumpChoice {
  StumpHypothesis stump;
  std::size_t index = 0;
  double edge = 0.0;
  Vector gain_column;
};

/// Max-edge stump via a per-feature sorted sweep with prefix sums of d_i y_i.
/// Throws ConfigError on an empty pool.
StumpChoice best_stump(const Dataset& data, const Distribution& d, const StumpPool& pool);

/// argmax_k edges(full, d)_k, lowest index on ties.
std::size_t pool_oracle(const GainMatrix& full, const Distribution& d);

/// A column the weak learner hands back to the booster.
struct LearnerResponse {
  HypothesisId id = 0;
  double edge = 0.0;
  Vector column;
};

/// Best-response oracle queried by the boosters. Implementations are used
/// from the owning run only.
class WeakLearner {
 public:
  virtual ~WeakLearner() = default;
  virtual std::size_t example_count() const = 0;
  virtual LearnerResponse best_response(const Distribution& d) = 0;
};

/// Exact max-edge learner over the stump pool of a dataset. Hypothesis ids
/// are pool indices.
class StumpLearner : public WeakLearner {
 public:
  explicit StumpLearner(const Dataset& data) : data_(data), pool_(data) {}

  std::size_t example_count() const override { return data_.size(); }
  LearnerResponse best_response(const Distribution& d) override;

  const StumpPool& pool() const { return pool_; }
  const StumpHypothesis& stump(HypothesisId id) const { return pool_.candidates().at(id); }

 private:
  const Dataset& data_;
  StumpPool pool_;
};

/// Max-edge learner over an explicit gain matrix; ids are column indices.
class PoolOracleLearner : public WeakLearner {
 public:
  explicit PoolOracleLearner(GainMatrix full) : full_(std::move(full)) {}

  std::size_t example_count() const override { return full_.rows(); }
  LearnerResponse best_response(const Distribution& d) override;

  const GainMatrix& matrix() const { return full_; }

 private:
  GainMatrix full_;
};

/// Gain matrix of the entire stump pool (column k = pool candidate k).
GainMatrix pool_gain_matrix(const Dataset& data, const StumpPool& pool);

}  // namespace marginforge
