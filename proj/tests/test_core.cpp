#include <doctest.h>

#include <cmath>
#include <random>

#include "marginforge/core.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace marginforge;

TEST_CASE("cap params derive eta from the tolerance") {
  const auto p = CapParams::from_tolerance(200, 20.0, 0.01);
  CHECK(p.eta == doctest::Approx(2.0 * std::log(10.0) / 0.01).epsilon(1e-14));
  CHECK(p.entropy_bound() == doctest::Approx(std::log(10.0)));
  CHECK_FALSE(p.singleton());
  CHECK(CapParams::from_tolerance(5, 5.0, 0.1).singleton());
  CHECK(CapParams::from_tolerance(5, 5.0, 0.1).eta > 0.0);
  CHECK_THROWS_AS(CapParams::from_tolerance(5, 0.5, 0.1), ConfigError);
  CHECK_THROWS_AS(CapParams::from_tolerance(5, 6.0, 0.1), ConfigError);
  CHECK_THROWS_AS(CapParams::from_tolerance(5, 2.0, 0.0), ConfigError);
  CHECK_THROWS_AS(CapParams::with_eta(5, 2.0, -1.0), ConfigError);
}

TEST_CASE("margins") {
  const Vector c{0.5, -1.0, 0.25};
  auto one = GainMatrix::from_columns({c});
  CHECK(margins(one, EnsembleWeights::point_mass(0)) == c);

  auto twin = GainMatrix::from_columns({c, {0.5, -1.0, 0.25}});
  EnsembleWeights half;
  half.coeffs = {{0, 0.5}, {1, 0.5}};
  const auto mw = margins(twin, half);
  for (std::size_t i = 0; i < 3; ++i) CHECK(mw[i] == doctest::Approx(c[i]));

  auto sym = GainMatrix::from_columns({{1, -1}, {-1, 1}});
  const auto zero = margins(sym, half);
  CHECK(zero[0] == 0.0);
  CHECK(zero[1] == 0.0);

  CHECK_THROWS_AS(margins(one, EnsembleWeights::point_mass(3)), StructuralError);
}

TEST_CASE("edges") {
  auto ones = GainMatrix::from_columns({{1, 1, 1, 1}});
  CHECK(edges(ones, Distribution::uniform(4))[0] == doctest::Approx(1.0));
  auto alt = GainMatrix::from_columns({{1, -1}});
  CHECK(edges(alt, Distribution::uniform(2))[0] == doctest::Approx(0.0));
  CHECK(edges(alt, Distribution{{0.7, 0.3}})[0] == doctest::Approx(0.4));
  CHECK_THROWS_AS(edges(alt, Distribution::uniform(3)), StructuralError);
}

TEST_CASE("relative entropy") {
  for (std::size_t m : {1u, 2u, 7u, 100u}) {
    CHECK(std::fabs(relative_entropy(Distribution::uniform(m))) <= 1e-12);
  }
  CHECK(relative_entropy(Vector{1, 0, 0, 0}) == doctest::Approx(1.386294).epsilon(1e-6));
  // extreme point of the m=4, nu=2 capped simplex reaches ln(m/nu)
  CHECK(relative_entropy(Vector{0.5, 0.5, 0, 0}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  // below the zero threshold counts as 0
  CHECK(relative_entropy(Vector{1.0, 1e-16}) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("relative entropy never exceeds ln(m/nu) on the capped simplex") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 2000; ++rep) {
    const std::size_t m = 2 + rng() % 30;
    const double nu = static_cast<double>(1 + rng() % m);
    const auto d = testsupport::random_capped(rng, m, nu);
    REQUIRE(d.is_valid(nu));
    CHECK(relative_entropy(d) <= std::log(m / nu) + 1e-9);
    CHECK(relative_entropy(d) >= -1e-12);
  }
  for (std::size_t m = 1; m <= 8; ++m) {
    for (std::size_t nu = 1; nu <= m; ++nu) {
      double top = 0;
      for (const auto& v : oracle::capped_vertices(m, static_cast<double>(nu))) {
        top = std::max(top, relative_entropy(v));
      }
      CHECK(top == doctest::Approx(std::log(static_cast<double>(m) / nu)).epsilon(1e-12));
    }
  }
}

TEST_CASE("edges and margins are bilinear") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t m = 1 + rng() % 20, t = 1 + rng() % 8;
    const auto a = testsupport::random_matrix(rng, m, t);
    const auto d = testsupport::random_capped(rng, m, 1.0);
    EnsembleWeights w;
    for (std::size_t k = 0; k < t; ++k) {
      if (rng() % 2 || k == 0) w.coeffs[k] = 0.1 + static_cast<double>(rng() % 100);
    }
    w.normalize();
    const auto e = edges(a, d);
    const auto mw = margins(a, w);
    CHECK(dot(e, w.dense(t)) == doctest::Approx(dot(d.weights, mw)).epsilon(1e-12));
    for (double v : mw) CHECK(std::fabs(v) <= 1.0 + 1e-15);
    for (double v : e) CHECK(std::fabs(v) <= 1.0 + 1e-15);
  }
}

TEST_CASE("gain matrix keeps hypotheses a set") {
  GainMatrix a(3);
  CHECK(a.add_column({1, -1, 1}, 7) == 0);
  CHECK(a.add_column({1, -1, 1}, 7) == 0);
  // same column under another id is also folded
  CHECK(a.add_column({1, -1, 1}, 9) == 0);
  CHECK(a.add_column({-1, -1, 1}, 9) == 1);
  CHECK(a.cols() == 2);
  CHECK(a.find(7) == 0);
  CHECK(a.find(9) == 1);
  CHECK(a.find(42) == a.cols());
  CHECK_THROWS_AS(a.add_column({1, 1}, 3), StructuralError);
  CHECK_THROWS_AS(a.add_column({2, 1, 1}, 3), InputError);
}

TEST_CASE("ensemble weights") {
  EnsembleWeights w;
  w.coeffs = {{0, 2.0}, {3, 1e-14}, {5, 2.0}};
  w.normalize();
  CHECK(w.coeffs.size() == 2);
  CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(w.is_valid());
  CHECK(w.at(3) == 0.0);
  CHECK(EnsembleWeights::uniform(4).at(2) == doctest::Approx(0.25));
  EnsembleWeights empty;
  CHECK_THROWS_AS(empty.normalize(), StructuralError);
}

TEST_CASE("dataset validation") {
  CHECK_THROWS_AS(Dataset({1.0, 2.0}, 1, {1, 0}), InputError);
  CHECK_THROWS_AS(Dataset({1.0, 2.0, 3.0}, 1, {1, -1}), StructuralError);
  CHECK_THROWS_AS(Dataset({}, 1, {}), InputError);
  const Dataset ok({1.0, 2.0, 3.0, 4.0}, 2, {1, -1});
  CHECK(ok.feature(1, 0) == 3.0);
  CHECK(ok.row(1)[1] == 4.0);
}
