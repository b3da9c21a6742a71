#include "marginforge/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "marginforge/constants.hpp"

namespace marginforge {

namespace {

std::vector<std::size_t> ascending_order(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  return order;
}

void check_theta(std::span<const double> theta, const CapParams& params) {
  if (theta.size() != params.m) {
    throw StructuralError("theta length " + std::to_string(theta.size()) + " != m " +
                          std::to_string(params.m));
  }
  for (double v : theta) {
    if (!std::isfinite(v)) throw InputError("theta has non-finite entries");
  }
}

}  // namespace

ProjectionResult capped_entropy_projection(std::span<const double> theta, const CapParams& params) {
  check_theta(theta, params);
  const std::size_t m = theta.size();
  const double eta = params.eta;
  const double cap = params.cap();

  ProjectionResult out;
  if (params.singleton()) {
    // Only uniform(m) is feasible; its relative entropy is exactly zero.
    out.d = Distribution::uniform(m);
    out.objective = std::accumulate(theta.begin(), theta.end(), 0.0) / static_cast<double>(m);
    out.capped_count = m;
    double lz = std::numeric_limits<double>::infinity();
    for (double v : theta) lz = std::min(lz, -eta * v);
    out.log_z = lz + std::log(static_cast<double>(m));
    return out;
  }

  // (theta, index) pairs sort to the same order as a stable sort on theta.
  std::vector<std::pair<double, std::size_t>> sorted(m);
  for (std::size_t i = 0; i < m; ++i) sorted[i] = {theta[i], i};
  std::sort(sorted.begin(), sorted.end());

  // ratio[k] = sum_{j >= k} exp(-eta (theta_(j) - theta_(k))) >= 1, built
  // backwards with one exp per step; nothing overflows for any eta.
  std::vector<double> ratio(m);
  ratio[m - 1] = 1.0;
  for (std::size_t k = m - 1; k-- > 0;) {
    ratio[k] = 1.0 + ratio[k + 1] * std::exp(-eta * (sorted[k + 1].first - sorted[k].first));
  }

  // Cap the smallest thetas until the largest free weight fits under 1/nu.
  std::size_t capped = 0;
  double rest = 1.0;
  for (; capped < m; ++capped) {
    rest = std::max(0.0, 1.0 - static_cast<double>(capped) * cap);
    if (rest / ratio[capped] <= cap * (1.0 + tol::kCapRelativeSlack)) break;
  }

  out.d.weights.assign(m, 0.0);
  double entropy = 0.0;  // sum d ln d, from the closed form of each weight
  if (capped > 0) entropy += static_cast<double>(capped) * cap * std::log(cap);
  if (capped < m) {
    const double base = sorted[capped].first;
    const double log_head = std::log(rest) - std::log(ratio[capped]);
    for (std::size_t k = capped; k < m; ++k) {
      const double log_d = log_head - eta * (sorted[k].first - base);
      const double v = std::exp(log_d);
      out.d.weights[sorted[k].second] = v;
      if (v > tol::kEntropyZero) entropy += v * log_d;
    }
    out.log_z = -eta * base + std::log(ratio[capped]) - std::log(rest);
  } else {
    out.log_z = -std::numeric_limits<double>::infinity();
  }
  for (std::size_t k = 0; k < capped; ++k) out.d.weights[sorted[k].second] = cap;
  out.capped_count = capped;
  const double delta = std::max(0.0, entropy + std::log(static_cast<double>(m)));
  out.objective = dot(out.d.weights, theta) + delta / eta;
  return out;
}

double smoothed_conjugate(std::span<const double> theta, const CapParams& params) {
  std::vector<double> negated(theta.begin(), theta.end());
  for (double& v : negated) v = -v;
  return -capped_entropy_projection(negated, params).objective;
}

CappedMinimum capped_min_linear(std::span<const double> margins, double nu) {
  check_nu(margins.size(), nu);
  for (double v : margins) {
    if (!std::isfinite(v)) throw InputError("margins have non-finite entries");
  }
  const std::size_t m = margins.size();
  const auto order = ascending_order(margins);
  const double cap = 1.0 / nu;
  const auto full = std::min(m, static_cast<std::size_t>(std::floor(nu)));

  CappedMinimum out;
  out.argmin.weights.assign(m, 0.0);
  for (std::size_t k = 0; k < full; ++k) out.argmin.weights[order[k]] = cap;
  const double rest = 1.0 - static_cast<double>(full) * cap;
  if (full < m && rest > 0.0) out.argmin.weights[order[full]] = rest;
  out.value = dot(out.argmin.weights, margins);
  return out;
}

}  // namespace marginforge
