#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "mirror_agg/errors.hpp"
#include "mirror_agg/numeric.hpp"
#include "mirror_agg/simplex.hpp"
#include "support.hpp"

using namespace mirror_agg;

namespace {

double sum_of(const SimplexWeights& w) {
  double s = 0.0;
  for (double v : w.values()) s += v;
  return s;
}

}  // namespace

TEST_CASE("gibbs_map on hand-computed inputs") {
  const std::vector<double> zero{0.0, 0.0, 0.0};
  const auto w = gibbs_map(zero, 1.0);
  for (double v : w.values()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  const std::vector<double> ln2{std::log(2.0), 0.0};
  const auto w2 = gibbs_map(ln2, 1.0);
  CHECK(w2[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(w2[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

  const std::vector<double> wide{0.0, 1000.0};
  const auto w3 = gibbs_map(wide, 1.0);
  CHECK(std::isfinite(w3[0]));
  CHECK(w3[0] == doctest::Approx(1.0));
  CHECK(w3[1] < 1e-300);
  CHECK(std::abs(sum_of(w3) - 1.0) <= 1e-12);

  for (double c : {-7.5, 0.0, 3.25, 1e6}) {
    const std::vector<double> flat(5, c);
    for (double beta : {1e-3, 1.0, 50.0}) {
      const auto w5 = gibbs_map(flat, beta);
      for (double v : w5.values()) CHECK(v == 0.2);
    }
  }
}

TEST_CASE("gibbs_map rejects bad input") {
  const std::vector<double> z{0.0, 1.0};
  CHECK_THROWS_AS(gibbs_map(z, 0.0), ParameterError);
  CHECK_THROWS_AS(gibbs_map(z, -1.0), ParameterError);
  CHECK_THROWS_AS(gibbs_map(z, std::numeric_limits<double>::quiet_NaN()), ParameterError);
  const std::vector<double> bad{0.0, std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(gibbs_map(bad, 1.0), InputError);
  const std::vector<double> nan{std::numeric_limits<double>::quiet_NaN(), 0.0};
  CHECK_THROWS_AS(gibbs_map(nan, 1.0), InputError);
}

TEST_CASE("gibbs_map: normalization, shift invariance, monotonicity on random inputs") {
  Rng rng(derive_seed(1, {}));
  std::size_t shift_failures = 0, order_failures = 0;
  for (int trial = 0; trial < 100000; ++trial) {
    const std::size_t m = 2 + uniform_index(rng, 30);
    const double beta = std::exp(uniform(rng, std::log(1e-3), std::log(1e3)));
    // Scores on a dyadic grid so that adding an integer shift is exact.
    std::vector<double> z(m), shifted(m);
    const double c = static_cast<double>(static_cast<long>(uniform_index(rng, 201)) - 100);
    for (std::size_t j = 0; j < m; ++j) {
      z[j] = std::ldexp(std::floor(uniform(rng, -20.0, 20.0) * 1048576.0), -20);
      shifted[j] = z[j] + c;
    }
    const auto w = gibbs_map(z, beta);
    REQUIRE(w.size() == m);
    for (double v : w.values()) REQUIRE(v >= 0.0);
    REQUIRE(std::abs(sum_of(w) - 1.0) <= 1e-12);

    const auto ws = gibbs_map(shifted, beta);
    for (std::size_t j = 0; j < m; ++j) {
      if (std::abs(w[j] - ws[j]) > 1e-12) ++shift_failures;
    }
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t k = 0; k < m; ++k) {
        if (z[j] < z[k] && w[j] < w[k]) ++order_failures;
      }
    }
  }
  CHECK(shift_failures == 0);
  CHECK(order_failures == 0);
}

TEST_CASE("gibbs_map approaches uniform at high temperature") {
  Rng rng(derive_seed(2, {}));
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = 2 + uniform_index(rng, 20);
    std::vector<double> z(m);
    for (auto& v : z) v = uniform(rng, -1.0, 1.0);
    const auto w = gibbs_map(z, 1e9);
    for (double v : w.values()) REQUIRE(std::abs(v - 1.0 / static_cast<double>(m)) <= 1e-8);
  }
}

TEST_CASE("renormalize") {
  const std::vector<double> a{2.0, 2.0};
  CHECK(renormalize(a) == SimplexWeights::uniform(2));
  const std::vector<double> b{1.0, 0.0, 0.0};
  CHECK(renormalize(b) == SimplexWeights::vertex(3, 0));
  const std::vector<double> c{1.0, 3.0};
  const auto w = renormalize(c);
  CHECK(w[0] == 0.25);
  CHECK(w[1] == 0.75);
  const std::vector<double> neg{1.0, -0.1};
  CHECK_THROWS_AS(renormalize(neg), InputError);
  const std::vector<double> zero{0.0, 0.0};
  CHECK_THROWS_AS(renormalize(zero), InputError);

  Rng rng(derive_seed(3, {}));
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t m = 2 + uniform_index(rng, 40);
    std::vector<double> raw(m);
    for (auto& v : raw) v = uniform(rng, 0.0, 1e3);
    REQUIRE(std::abs(sum_of(renormalize(raw)) - 1.0) <= 1e-12);
  }
}

TEST_CASE("SimplexWeights factories") {
  CHECK(SimplexWeights::uniform(4)[3] == 0.25);
  CHECK(SimplexWeights::vertex(3, 1)[1] == 1.0);
  CHECK_THROWS_AS(SimplexWeights::from_normalized({0.5, 0.6}), InputError);
  CHECK_THROWS_AS(SimplexWeights::from_normalized({1.2, -0.2}), InputError);
  CHECK_NOTHROW(SimplexWeights::from_normalized({0.3, 0.7}));
}

TEST_CASE("mixture_value") {
  const TabulatedDictionary dict({{1.0, 0.5}, {-1.0, -0.5}}, 1.0);
  CHECK(mixture_value(SimplexWeights::vertex(2, 0), dict, 0) == 1.0);
  CHECK(mixture_value(SimplexWeights::vertex(2, 1), dict, 1) == -0.5);
  CHECK(mixture_value(SimplexWeights::uniform(2), dict, 0) == 0.0);
  CHECK(mixture_value(SimplexWeights::from_normalized({0.25, 0.75}), dict, 0) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(mixture_value(SimplexWeights::uniform(3), dict, 0), InputError);
}

TEST_CASE("mixture_value is linear in theta") {
  Rng rng(derive_seed(4, {}));
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = 2 + uniform_index(rng, 6);
    const auto inst = support::random_instance(rng, m, 4, false);
    const auto dict = inst.dictionary();
    const auto a = support::random_simplex(rng, m);
    const auto b = support::random_simplex(rng, m);
    const double t = uniform01(rng);
    std::vector<double> mix(m);
    for (std::size_t j = 0; j < m; ++j) mix[j] = t * a[j] + (1.0 - t) * b[j];
    const auto wm = renormalize(mix);
    const double lhs = mixture_value(wm, dict, 2);
    const double rhs = t * mixture_value(renormalize(a), dict, 2) + (1.0 - t) * mixture_value(renormalize(b), dict, 2);
    REQUIRE(std::abs(lhs - rhs) <= 1e-12);
  }
}

TEST_CASE("dictionaries validate their range") {
  CHECK_THROWS_AS(TabulatedDictionary({{1.0, 2.0}, {0.0, 0.0}}, 1.0), InputError);
  CHECK_THROWS_AS(TabulatedDictionary({{1.0, 0.0}, {0.0}}, 1.0), InputError);
  const FunctionDictionary fd(3, 5, 1.0, [](std::size_t j, DesignPoint x) { return 0.1 * static_cast<double>(j) - 0.1 * static_cast<double>(x); });
  CHECK(fd.evaluate(2, 1) == doctest::Approx(0.1));
  std::vector<double> row(3);
  fd.evaluate_all(0, row);
  CHECK(row[2] == doctest::Approx(0.2));
}
