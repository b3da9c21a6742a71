#include "marginforge/weak_learner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace marginforge {

namespace {

double below(double v) { return v - std::max(1.0, std::abs(v)); }
double above(double v) { return v + std::max(1.0, std::abs(v)); }

}  // namespace

Vector gain_column(const Dataset& data, const StumpHypothesis& h) {
  if (h.feature >= data.feature_count()) throw StructuralError("stump feature out of range");
  Vector col(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    col[i] = static_cast<double>(data.label(i) * h.predict(data.row(i)));
  }
  return col;
}

StumpPool::StumpPool(const Dataset& data) {
  const std::size_t m = data.size();
  features_.resize(data.feature_count());
  for (std::size_t j = 0; j < data.feature_count(); ++j) {
    FeatureSweep& sweep = features_[j];
    sweep.order.resize(m);
    std::iota(sweep.order.begin(), sweep.order.end(), std::size_t{0});
    std::stable_sort(sweep.order.begin(), sweep.order.end(), [&](std::size_t a, std::size_t b) {
      return data.feature(a, j) < data.feature(b, j);
    });
    for (std::size_t k = 1; k <= m; ++k) {
      if (k == m || data.feature(sweep.order[k], j) != data.feature(sweep.order[k - 1], j)) {
        sweep.group_end.push_back(k);
      }
    }

    sweep.first_candidate = candidates_.size();
    auto add = [&](double threshold) {
      candidates_.push_back({j, threshold, +1});
      candidates_.push_back({j, threshold, -1});
    };
    const double lo = data.feature(sweep.order.front(), j);
    const double hi = data.feature(sweep.order.back(), j);
    add(below(lo));
    for (std::size_t q = 0; q + 1 < sweep.group_end.size(); ++q) {
      const double left = data.feature(sweep.order[sweep.group_end[q] - 1], j);
      const double right = data.feature(sweep.order[sweep.group_end[q]], j);
      add(0.5 * (left + right));
    }
    add(above(hi));
  }
}

StumpChoice best_stump(const Dataset& data, const Distribution& d, const StumpPool& pool) {
  if (pool.empty()) throw ConfigError("stump pool is empty");
  if (d.size() != data.size()) throw StructuralError("distribution length does not match dataset");

  Vector signed_weight(data.size());
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    signed_weight[i] = d.weights[i] * data.label(i);
    total += signed_weight[i];
  }

  // edge(+1) = total - 2 * (signed weight below the threshold); edge(-1) = -edge(+1).
  std::size_t best = 0;
  double best_edge = -2.0;
  auto consider = [&](std::size_t index, double below_sum) {
    const double plus = total - 2.0 * below_sum;
    if (plus > best_edge) {
      best_edge = plus;
      best = index;
    }
    if (-plus > best_edge) {
      best_edge = -plus;
      best = index + 1;
    }
  };
  for (const auto& sweep : pool.sweeps()) {
    std::size_t index = sweep.first_candidate;
    consider(index, 0.0);
    index += 2;
    double below_sum = 0.0;
    std::size_t k = 0;
    for (std::size_t q = 0; q < sweep.group_end.size(); ++q) {
      for (; k < sweep.group_end[q]; ++k) below_sum += signed_weight[sweep.order[k]];
      if (q + 1 == sweep.group_end.size()) {
        consider(index, total);
      } else {
        consider(index, below_sum);
      }
      index += 2;
    }
  }

  StumpChoice out;
  out.index = best;
  out.stump = pool.candidates()[best];
  out.gain_column = gain_column(data, out.stump);
  out.edge = dot(d.weights, out.gain_column);
  return out;
}

std::size_t pool_oracle(const GainMatrix& full, const Distribution& d) {
  if (full.cols() == 0) throw ConfigError("pool oracle needs at least one column");
  const Vector e = edges(full, d);
  std::size_t best = 0;
  for (std::size_t k = 1; k < e.size(); ++k) {
    if (e[k] > e[best]) best = k;
  }
  return best;
}

LearnerResponse StumpLearner::best_response(const Distribution& d) {
  StumpChoice c = best_stump(data_, d, pool_);
  return {c.index, c.edge, std::move(c.gain_column)};
}

LearnerResponse PoolOracleLearner::best_response(const Distribution& d) {
  const std::size_t k = pool_oracle(full_, d);
  return {k, dot(d.weights, full_.column(k)), full_.column(k)};
}

GainMatrix pool_gain_matrix(const Dataset& data, const StumpPool& pool) {
  std::vector<Vector> columns;
  columns.reserve(pool.size());
  for (const auto& h : pool.candidates()) columns.push_back(gain_column(data, h));
  return GainMatrix::from_columns(std::move(columns));
}

}  // namespace marginforge
