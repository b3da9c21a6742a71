#pragma once

#include <cstddef>

/// Numeric tolerances shared by every module. Changing one of these changes
/// the contract checked by the tests, so they live in one place.
namespace marginforge::tol {

// Simplex membership (Distribution / EnsembleWeights sums, cap overshoot).
inline constexpr double kSimplexSum = 1e-9;
inline constexpr double kCapOvershoot = 1e-12;

// Entropy: entries below this are treated as exact zeros (0 ln 0 = 0).
inline constexpr double kEntropyZero = 1e-15;

// Capped entropy projection: relative slack when testing whether the largest
// uncapped coordinate exceeds 1/nu.
inline constexpr double kCapRelativeSlack = 1e-12;

// Ensemble coefficients below this are removed from the support.
inline constexpr double kSupportDrop = 1e-12;

// Line search (bisection on the derivative sign).
inline constexpr double kLineSearchInterval = 1e-10;
inline constexpr int kLineSearchMaxIter = 50;

// LP solver.
inline constexpr double kLpPivot = 1e-9;
inline constexpr double kLpReducedCost = 1e-10;
inline constexpr double kLpFeasibility = 1e-9;
inline constexpr double kLpDualClip = 1e-10;

// Edge minimization: strong-duality gap that solve_edge_min must certify.
inline constexpr double kDualityGap = 1e-7;

// Fully corrective inner solver.
inline constexpr int kInnerMaxIter = 10000;

// Lower bound for the smoothing parameter when ln(m/nu) vanishes (nu = m).
inline constexpr double kEtaFloor = 1e-9;

}  // namespace marginforge::tol
