#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "marginforge/core.hpp"

namespace testsupport {

inline std::vector<double> uniform_vec(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Column of +-1 gains.
inline std::vector<double> sign_column(std::mt19937_64& rng, std::size_t m) {
  std::bernoulli_distribution b(0.5);
  std::vector<double> v(m);
  for (auto& x : v) x = b(rng) ? 1.0 : -1.0;
  return v;
}

inline marginforge::GainMatrix random_matrix(std::mt19937_64& rng, std::size_t m, std::size_t t,
                                             bool signs = false) {
  std::vector<std::vector<double>> cols;
  for (std::size_t k = 0; k < t; ++k) {
    cols.push_back(signs ? sign_column(rng, m) : uniform_vec(rng, m, -1.0, 1.0));
  }
  return marginforge::GainMatrix::from_columns(cols);
}

// A point of the capped simplex: random weights pushed through repeated
// clipping until the cap holds.
inline marginforge::Distribution random_capped(std::mt19937_64& rng, std::size_t m, double nu) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> d(m);
  double s = 0;
  for (auto& x : d) s += (x = e(rng));
  for (auto& x : d) x /= s;
  const double cap = 1.0 / nu;
  for (int round = 0; round < 100; ++round) {
    double excess = 0, room = 0;
    for (auto& x : d) {
      if (x > cap) {
        excess += x - cap;
        x = cap;
      }
    }
    if (excess <= 0) break;
    for (double x : d) room += cap - x;
    if (!(room > excess * (1 + 1e-12))) {
      // capped simplex is (numerically) the single point uniform(m)
      d.assign(m, 1.0 / static_cast<double>(m));
      break;
    }
    for (auto& x : d) x += excess * (cap - x) / room;
  }
  return {d};
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("marginforge-" + tag + "-" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace testsupport
