#pragma once
// Brute-force reference implementations used only by the tests. None of
// these share code with the library: they enumerate instead of sorting,
// pivoting or sweeping.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using LVec = std::vector<long double>;

struct Projection {
  Vec d;
  double objective = 0.0;
};

inline long double entropy_term(const LVec& d) {
  long double s = std::log(static_cast<long double>(d.size()));
  for (long double x : d) {
    if (x > 0) s += x * std::log(x);
  }
  return s;
}

// argmin d.theta + (1/eta) KL(d || uniform) over the capped simplex, by
// trying every capped subset: for a fixed capped set the free part is
// proportional to exp(-eta theta). The true minimizer is one of the
// feasible candidates, and every feasible candidate is a point of the set,
// so the smallest objective wins.
inline Projection kkt_projection(const Vec& theta, double nu, double eta) {
  const std::size_t m = theta.size();
  const long double cap = 1.0L / nu;
  Projection best;
  long double best_obj = std::numeric_limits<long double>::infinity();
  for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
    const std::size_t r = static_cast<std::size_t>(__builtin_popcountll(mask));
    const long double rest = 1.0L - static_cast<long double>(r) * cap;
    if (rest < -1e-15L) continue;
    if (r == m) {
      if (std::fabs(rest) > 1e-12L) continue;
    } else if (rest <= 0) {
      continue;
    }
    long double lo = std::numeric_limits<long double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      if (!(mask >> i & 1)) lo = std::min(lo, static_cast<long double>(theta[i]));
    }
    long double z = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (!(mask >> i & 1)) z += std::exp(-static_cast<long double>(eta) * (theta[i] - lo));
    }
    LVec d(m);
    bool ok = true;
    for (std::size_t i = 0; i < m; ++i) {
      if (mask >> i & 1) {
        d[i] = cap;
      } else {
        d[i] = rest * std::exp(-static_cast<long double>(eta) * (theta[i] - lo)) / z;
        if (d[i] > cap * (1 + 1e-12L)) ok = false;
      }
    }
    if (!ok) continue;
    long double obj = entropy_term(d) / eta;
    for (std::size_t i = 0; i < m; ++i) obj += d[i] * theta[i];
    if (obj < best_obj) {
      best_obj = obj;
      best.d.assign(d.begin(), d.end());
    }
  }
  best.objective = static_cast<double>(best_obj);
  return best;
}

// max_d d.theta - (1/eta) KL over the capped simplex.
inline double conjugate(const Vec& theta, double nu, double eta) {
  Vec neg(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) neg[i] = -theta[i];
  return -kkt_projection(neg, nu, eta).objective;
}

// Extreme points of {d in [0, 1/nu]^m, sum d = 1}: floor(nu) coordinates at
// the cap and (if anything remains) one coordinate holding the rest.
inline std::vector<Vec> capped_vertices(std::size_t m, double nu) {
  const double cap = 1.0 / nu;
  const std::size_t k = static_cast<std::size_t>(std::floor(nu + 1e-12));
  const double rest = 1.0 - static_cast<double>(k) * cap;
  std::vector<Vec> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcountll(mask)) != k) continue;
    if (rest <= 1e-12) {
      Vec d(m, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        if (mask >> i & 1) d[i] = cap;
      }
      out.push_back(d);
      continue;
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (mask >> j & 1) continue;
      Vec d(m, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        if (mask >> i & 1) d[i] = cap;
      }
      d[j] = rest;
      out.push_back(d);
    }
  }
  return out;
}

// Gaussian elimination with partial pivoting; nullopt when singular.
inline std::optional<Vec> solve_square(std::vector<Vec> a, Vec b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::fabs(a[r][c]) > std::fabs(a[p][c])) p = r;
    }
    if (std::fabs(a[p][c]) < 1e-11) return std::nullopt;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  Vec x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

// Calls f(subset) for every k-subset of [0, n).
template <class F>
void for_each_subset(std::size_t n, std::size_t k, F&& f) {
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  if (k > n) return;
  while (true) {
    f(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// max c.x  s.t.  A x <= b, x >= 0, by trying every choice of n tight
// constraints among the n + r. Returns nullopt when nothing is feasible.
inline std::optional<double> lp_vertex_max(const std::vector<Vec>& a, const Vec& b, const Vec& c) {
  const std::size_t r = a.size();
  const std::size_t n = c.size();
  std::optional<double> best;
  for_each_subset(n + r, n, [&](const std::vector<std::size_t>& tight) {
    std::vector<Vec> sys;
    Vec rhs;
    for (std::size_t t : tight) {
      if (t < r) {
        sys.push_back(a[t]);
        rhs.push_back(b[t]);
      } else {
        Vec e(n, 0.0);
        e[t - r] = 1.0;
        sys.push_back(e);
        rhs.push_back(0.0);
      }
    }
    const auto x = solve_square(sys, rhs);
    if (!x) return;
    for (double v : *x) {
      if (v < -1e-9) return;
    }
    for (std::size_t i = 0; i < r; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < n; ++j) s += a[i][j] * (*x)[j];
      if (s > b[i] + 1e-9) return;
    }
    double v = 0;
    for (std::size_t j = 0; j < n; ++j) v += c[j] * (*x)[j];
    if (!best || v > *best) best = v;
  });
  return best;
}

// min over the capped simplex of max_k d.col_k, by enumerating vertices of
// {(d, g) : d.col_k <= g}: s edge rows tight, m - s coordinates pinned at
// 0 or 1/nu, the remaining s coordinates and g solved from the equalities.
inline double edge_min_vertices(const std::vector<Vec>& cols, double nu) {
  const std::size_t t = cols.size();
  const std::size_t m = cols.front().size();
  const double cap = 1.0 / nu;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t s = 1; s <= std::min(t, m); ++s) {
    for_each_subset(t, s, [&](const std::vector<std::size_t>& rows) {
      for_each_subset(m, s, [&](const std::vector<std::size_t>& free) {
        std::vector<std::size_t> pinned;
        for (std::size_t i = 0, f = 0; i < m; ++i) {
          if (f < s && free[f] == i) {
            ++f;
          } else {
            pinned.push_back(i);
          }
        }
        for (std::size_t bits = 0; bits < (std::size_t{1} << pinned.size()); ++bits) {
          Vec d(m, 0.0);
          double used = 0;
          for (std::size_t q = 0; q < pinned.size(); ++q) {
            if (bits >> q & 1) {
              d[pinned[q]] = cap;
              used += cap;
            }
          }
          if (used > 1 + 1e-12) continue;
          // unknowns: d[free...], g
          std::vector<Vec> sys;
          Vec rhs;
          Vec sum_row(s + 1, 1.0);
          sum_row[s] = 0.0;
          sys.push_back(sum_row);
          rhs.push_back(1.0 - used);
          for (std::size_t k : rows) {
            Vec row(s + 1);
            double fixed = 0;
            for (std::size_t q = 0; q < s; ++q) row[q] = cols[k][free[q]];
            row[s] = -1.0;
            for (std::size_t i : pinned) fixed += d[i] * cols[k][i];
            sys.push_back(row);
            rhs.push_back(-fixed);
          }
          const auto x = solve_square(sys, rhs);
          if (!x) continue;
          bool ok = true;
          for (std::size_t q = 0; q < s; ++q) {
            if ((*x)[q] < -1e-10 || (*x)[q] > cap + 1e-10) ok = false;
            d[free[q]] = (*x)[q];
          }
          if (!ok) continue;
          double g = -std::numeric_limits<double>::infinity();
          for (const auto& c : cols) {
            double e = 0;
            for (std::size_t i = 0; i < m; ++i) e += d[i] * c[i];
            g = std::max(g, e);
          }
          best = std::min(best, g);
        }
      });
    });
  }
  return best;
}

// min over the capped simplex of d.v, by vertex enumeration.
inline double capped_min_vertices(const Vec& v, double nu) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& d : capped_vertices(v.size(), nu)) {
    double s = 0;
    for (std::size_t i = 0; i < v.size(); ++i) s += d[i] * v[i];
    best = std::min(best, s);
  }
  return best;
}

}  // namespace oracle
