#include <doctest.h>

#include <cmath>
#include <vector>

#include "mirror_agg/aggregation.hpp"
#include "mirror_agg/errors.hpp"
#include "mirror_agg/numeric.hpp"
#include "mirror_agg/oracles.hpp"
#include "support.hpp"

using namespace mirror_agg;

namespace {

std::vector<LabeledSample> draw(Rng& rng, const support::RawInstance& inst, std::size_t n) {
  return inst.distribution().sample(rng, n);
}

// Plain re-implementation of the linearized recursion used as an oracle:
// weights recomputed from scratch with exp(-(zeta_j)/beta) and no shifting.
std::vector<double> naive_lma(const support::RawInstance& inst, LossKind kind, const std::vector<LabeledSample>& data,
                              double beta) {
  const std::size_t m = inst.m();
  std::vector<double> zeta(m, 0.0), avg(m, 0.0);
  for (const auto& z : data) {
    double total = 0.0;
    std::vector<double> w(m);
    for (std::size_t j = 0; j < m; ++j) total += w[j] = std::exp(-zeta[j] / beta);
    for (std::size_t j = 0; j < m; ++j) avg[j] += w[j] / total;
    for (std::size_t j = 0; j < m; ++j) zeta[j] += support::ref_loss(kind, z.y, inst.columns[j][z.x]);
  }
  for (auto& v : avg) v /= static_cast<double>(data.size());
  return avg;
}

}  // namespace

TEST_CASE("ma_init") {
  const auto s2 = ma_init(2);
  CHECK(s2.step == 0);
  CHECK(s2.mirrored == SimplexWeights::uniform(2));
  CHECK(s2.scores == ScoreVector(2));
  CHECK(s2.gamma_total == 0.0);
  const auto s5 = ma_init(5);
  for (double v : s5.mirrored.values()) CHECK(v == 0.2);
  CHECK_THROWS_AS(s5.averaged(), InputError);
  CHECK_THROWS_AS(ma_init(1), ParameterError);
}

TEST_CASE("schedules") {
  const auto s = Schedule::default_for(LossSpec::squared(), 1.0, 8);
  CHECK(s.kind() == Schedule::Kind::sqrt_growth);
  CHECK(s.gamma_at(3) == 1.0);
  CHECK(s.beta_at(4) == doctest::Approx(2.0 * std::sqrt(16.0 / std::log(8.0))));
  CHECK_THROWS_AS(s.beta_at(0), ParameterError);
  CHECK_THROWS_AS(Schedule::constant(-1.0).beta_at(1), ParameterError);
  const auto c = Schedule::custom([](std::size_t i) { return 1.0 / static_cast<double>(i); },
                                  [](std::size_t) { return 0.5; });
  CHECK(c.beta_at(4) == 0.25);
  CHECK(c.gamma_at(9) == 0.5);
}

TEST_CASE("one MA step by hand") {
  const TabulatedDictionary dict({{1.0}, {-1.0}}, 1.0);
  const auto s1 = ma_step(ma_init(2), {0, 1.0}, LossSpec::squared(), dict, Schedule::constant(1.0, 1.0));
  CHECK(s1.step == 1);
  CHECK(s1.scores[0] == -2.0);
  CHECK(s1.scores[1] == 2.0);
  const double e2 = std::exp(2.0), em2 = std::exp(-2.0);
  CHECK(s1.mirrored[0] == doctest::Approx(e2 / (e2 + em2)).epsilon(1e-14));
  CHECK(s1.mirrored[0] == doctest::Approx(0.9820).epsilon(1e-4));
  CHECK(s1.mirrored[1] == doctest::Approx(em2 / (e2 + em2)).epsilon(1e-12));
  CHECK(s1.averaged() == SimplexWeights::uniform(2));

  // Second step averages theta-bar_0 and theta-bar_1.
  const auto s2 = ma_step(s1, {0, 1.0}, LossSpec::squared(), dict, Schedule::constant(1.0, 1.0));
  CHECK(s2.averaged()[0] == doctest::Approx(0.5 * (0.5 + s1.mirrored[0])).epsilon(1e-14));
  CHECK(s2.gamma_total == 2.0);
}

TEST_CASE("zero gradient keeps everything uniform") {
  const TabulatedDictionary dict({{0.5, -0.25}, {0.5, -0.25}, {0.5, -0.25}}, 1.0);
  const std::vector<LabeledSample> data{{0, 0.5}, {1, -0.25}, {0, 0.5}, {1, -0.25}};
  const auto r = ma_run(data, LossSpec::squared(), dict, Schedule::default_for(LossSpec::squared(), 1.0, 3));
  CHECK(r.weights == SimplexWeights::uniform(3));
  CHECK(r.final_state.mirrored == SimplexWeights::uniform(3));
  for (double v : r.final_state.scores.values()) CHECK(v == 0.0);
}

TEST_CASE("ma_run basics") {
  Rng rng(derive_seed(20, {}));
  const auto inst = support::random_instance(rng, 4, 5, false);
  const auto dict = inst.dictionary();
  const auto sched = Schedule::default_for(LossSpec::squared(), 1.0, 4);
  const auto data = draw(rng, inst, 1);
  CHECK(ma_run(data, LossSpec::squared(), dict, sched).weights == SimplexWeights::uniform(4));
  CHECK_THROWS_AS(ma_run(std::vector<LabeledSample>{}, LossSpec::squared(), dict, sched), InputError);
  const std::vector<LabeledSample> labels{{0, 1.0}, {1, -1.0}};
  CHECK_THROWS_AS(ma_run(labels, LossSpec::phi(LossKind::phi_hinge), dict, sched), NotDifferentiableError);
}

TEST_CASE("duplicate dictionary elements keep exactly equal weights") {
  Rng rng(derive_seed(21, {}));
  for (int t = 0; t < 50; ++t) {
    auto inst = support::random_instance(rng, 2, 4, false);
    inst.columns[1] = inst.columns[0];
    const auto data = draw(rng, inst, 200);
    const auto r = ma_run(data, LossSpec::squared(), inst.dictionary(),
                          Schedule::default_for(LossSpec::squared(), 1.0, 2));
    REQUIRE(r.weights[0] == 0.5);
    REQUIRE(r.weights[1] == 0.5);
  }
}

TEST_CASE("fold equivalence and replay determinism") {
  Rng rng(derive_seed(22, {}));
  for (LossKind k : {LossKind::squared, LossKind::phi_exponential, LossKind::phi_logit2}) {
    const LossSpec spec = k == LossKind::squared ? LossSpec::squared() : LossSpec::phi(k);
    const auto inst = support::random_instance(rng, 5, 6, k != LossKind::squared);
    const auto dict = inst.dictionary();
    const auto data = draw(rng, inst, 300);
    const auto sched = Schedule::default_for(spec, 1.0, 5);
    auto state = ma_init(5);
    for (const auto& z : data) state = ma_step(state, z, spec, dict, sched);
    const auto r = ma_run(data, spec, dict, sched);
    CHECK(r.final_state == state);
    CHECK(r.weights == state.averaged());
    CHECK(ma_run(data, spec, dict, sched).final_state == r.final_state);

    double total = 0.0;
    for (double v : state.weighted_sum) total += v;
    CHECK(std::abs(total - state.gamma_total) <= 1e-9 * state.gamma_total);
  }
}

TEST_CASE("one LMA step by hand") {
  const TabulatedDictionary dict({{0.0}, {1.0}}, 1.0);
  const std::vector<LabeledSample> data{{0, 0.0}};
  const auto r = lma_run(data, LossSpec::squared(), dict, 1.0);
  CHECK(r.final_state.scores[0] == 0.0);
  CHECK(r.final_state.scores[1] == 1.0);
  CHECK(r.final_state.mirrored[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-14));
  CHECK(r.final_state.mirrored[0] == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(r.weights == SimplexWeights::uniform(2));
  CHECK_THROWS_AS(lma_run(data, LossSpec::squared(), dict, 0.0), ParameterError);
}

TEST_CASE("LMA at very high temperature stays uniform") {
  Rng rng(derive_seed(23, {}));
  const auto inst = support::random_instance(rng, 6, 8, false);
  const auto dict = inst.dictionary();
  const auto data = draw(rng, inst, 1000);
  auto state = ma_init(6);
  const auto sched = Schedule::constant(1e12, 1.0);
  const ScoreDirection u = [&](const LabeledSample& z, const SimplexWeights&, std::span<double> out) {
    const auto v = linearized_loss_vector(LossSpec::squared(), dict, z);
    std::copy(v.begin(), v.end(), out.begin());
  };
  for (const auto& z : data) {
    mirror_step(state, z, u, sched);
    for (double w : state.mirrored.values()) REQUIRE(std::abs(w - 1.0 / 6.0) <= 1e-9);
  }
  const auto r = lma_run(data, LossSpec::squared(), dict, 1e12);
  for (double w : r.weights.values()) CHECK(std::abs(w - 1.0 / 6.0) <= 1e-9);
}

TEST_CASE("LMA is mirror averaging on the linear surrogate loss") {
  Rng rng(derive_seed(24, {}));
  for (LossKind k : {LossKind::squared, LossKind::phi_exponential, LossKind::phi_logit2, LossKind::phi_hinge}) {
    const LossSpec spec = k == LossKind::squared ? LossSpec::squared() : LossSpec::phi(k);
    for (int t = 0; t < 20; ++t) {
      const std::size_t m = 2 + uniform_index(rng, 10);
      const auto inst = support::random_instance(rng, m, 5, k != LossKind::squared);
      const auto data = draw(rng, inst, 1 + uniform_index(rng, 60));
      const double beta = uniform(rng, 1.0, 8.0);
      const auto r = lma_run(data, spec, inst.dictionary(), beta);
      const auto ref = naive_lma(inst, k, data, beta);
      for (std::size_t j = 0; j < m; ++j) REQUIRE(std::abs(r.weights[j] - ref[j]) <= 1e-12);
    }
  }
}

TEST_CASE("erm_select") {
  const TabulatedDictionary perfect({{0.2, -0.4}, {0.9, 0.9}}, 1.0);
  const std::vector<LabeledSample> data{{0, 0.2}, {1, -0.4}, {0, 0.2}};
  const auto sel = erm_select(data, LossSpec::squared(), perfect);
  CHECK(sel.index == 0);
  CHECK(sel.empirical_risk == 0.0);

  const TabulatedDictionary tied({{0.5}, {-0.5}, {0.5}}, 1.0);
  const std::vector<LabeledSample> zero{{0, 0.0}};
  CHECK(erm_select(zero, LossSpec::squared(), tied).index == 0);

  Rng rng(derive_seed(25, {}));
  for (LossKind k : {LossKind::squared, LossKind::phi_exponential, LossKind::phi_hinge}) {
    const LossSpec spec = k == LossKind::squared ? LossSpec::squared() : LossSpec::phi(k);
    for (int t = 0; t < 200; ++t) {
      const std::size_t m = 2 + uniform_index(rng, 30);
      const auto inst = support::random_instance(rng, m, 4, k != LossKind::squared);
      const auto data = draw(rng, inst, 1 + uniform_index(rng, 40));
      std::size_t best = 0;
      double best_risk = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (const auto& z : data) s += support::ref_loss(k, z.y, inst.columns[j][z.x]);
        s /= static_cast<double>(data.size());
        if (j == 0 || s < best_risk - 1e-12) {
          best = j;
          best_risk = s;
        }
      }
      const auto got = erm_select(data, spec, inst.dictionary());
      REQUIRE(got.index == best);
      REQUIRE(got.empirical_risk == doctest::Approx(best_risk).epsilon(1e-12));
    }
  }
}

TEST_CASE("MA output is exchange-symmetric in expectation under a symmetric law") {
  // f_1 and f_2 swap under x <-> 1 - x, and the law is invariant under that swap.
  const TabulatedDictionary dict({{0.6, -0.2}, {-0.2, 0.6}}, 1.0);
  const FiniteDistribution dist({{{0, 0.5}, 0.25}, {{0, -0.5}, 0.25}, {{1, 0.5}, 0.25}, {{1, -0.5}, 0.25}});
  const auto sched = Schedule::default_for(LossSpec::squared(), 1.0, 2);
  CompensatedSum sum, sum_sq;
  const int reps = 4000;
  for (int r = 0; r < reps; ++r) {
    Rng rng(derive_seed(26, {static_cast<std::uint64_t>(r)}));
    const auto data = dist.sample(rng, 20);
    const double w = ma_run(data, LossSpec::squared(), dict, sched).weights[0];
    sum.add(w);
    sum_sq.add(w * w);
  }
  const double mean = sum.value() / reps;
  const double var = sum_sq.value() / reps - mean * mean;
  const double se = std::sqrt(var / reps);
  CHECK(se > 0.0);
  CHECK(std::abs(mean - 0.5) <= 3.0 * se);
}
