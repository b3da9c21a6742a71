#pragma once

#include <cstddef>
#include <span>

#include "marginforge/core.hpp"

namespace marginforge {

/// Minimizer of d^T theta + (1/eta) relative_entropy(d) over the capped simplex.
struct ProjectionResult {
  Distribution d;
  /// d^T theta + (1/eta) relative_entropy(d) at the minimizer.
  double objective = 0.0;
  /// Number of coordinates sitting at the cap 1/nu.
  std::size_t capped_count = 0;
  /// ln Z of the KKT form d_i = min(1/nu, exp(-eta theta_i) / Z).
  double log_z = 0.0;
};

/// Sorting-based O(m log m) solver. Coordinates with the smallest theta are
/// capped first; the rest are proportional to exp(-eta theta_i), evaluated
/// with a per-suffix log-sum-exp so that large eta cannot overflow.
/// Throws InputError on non-finite theta, StructuralError if
/// theta.size() != params.m.
ProjectionResult capped_entropy_projection(std::span<const double> theta, const CapParams& params);

/// The smoothed conjugate max_d [d^T theta - (1/eta) relative_entropy(d)]
/// over the capped simplex. It never exceeds the unsmoothed maximum and is
/// at most ln(m/nu)/eta below it.
double smoothed_conjugate(std::span<const double> theta, const CapParams& params);

struct CappedMinimum {
  double value = 0.0;
  Distribution argmin;
};

/// Exact min over the capped simplex of d^T margins: water-fill 1/nu onto the
/// floor(nu) smallest margins and the remainder onto the next one.
CappedMinimum capped_min_linear(std::span<const double> margins, double nu);

}  // namespace marginforge
