#include "mirror_agg/aggregation.hpp"

#include <cmath>
#include <string>

#include "mirror_agg/errors.hpp"
#include "mirror_agg/numeric.hpp"

namespace mirror_agg {

namespace {

double checked(double v, const char* what, std::size_t i) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ParameterError(std::string(what) + " at step " + std::to_string(i) + " must be positive and finite");
  }
  return v;
}

}  // namespace

Schedule Schedule::constant(double beta, double gamma) {
  checked(beta, "beta", 1);
  checked(gamma, "gamma", 1);
  return Schedule(Kind::constant, [beta](std::size_t) { return beta; }, [gamma](std::size_t) { return gamma; });
}

Schedule Schedule::sqrt_growth(double beta0, double gamma) {
  checked(beta0, "beta0", 1);
  checked(gamma, "gamma", 1);
  return Schedule(
      Kind::sqrt_growth, [beta0](std::size_t i) { return beta0 * std::sqrt(static_cast<double>(i)); },
      [gamma](std::size_t) { return gamma; });
}

Schedule Schedule::custom(Sequence beta, Sequence gamma) {
  if (!beta || !gamma) throw ParameterError("custom schedule needs both beta and gamma sequences");
  return Schedule(Kind::custom, std::move(beta), std::move(gamma));
}

Schedule Schedule::default_for(const LossSpec& spec, double range_bound, std::size_t m) {
  if (m < 2) throw ParameterError("schedule needs M >= 2");
  const double q_star = q_star_bound(spec, range_bound);
  return sqrt_growth(std::sqrt(q_star / std::log(static_cast<double>(m))));
}

double Schedule::beta_at(std::size_t i) const {
  if (i == 0) throw ParameterError("schedules are indexed from step 1");
  return checked(beta_(i), "beta", i);
}

double Schedule::gamma_at(std::size_t i) const {
  if (i == 0) throw ParameterError("schedules are indexed from step 1");
  return checked(gamma_(i), "gamma", i);
}

SimplexWeights AggregatorState::averaged() const {
  if (step == 0) throw InputError("averaged weights are undefined before the first step");
  return renormalize(weighted_sum);
}

AggregatorState ma_init(std::size_t m) {
  if (m < 2) throw ParameterError("mirror averaging needs M >= 2, got " + std::to_string(m));
  return AggregatorState{0, ScoreVector(m), SimplexWeights::uniform(m), std::vector<double>(m, 0.0), 0.0};
}

void mirror_step(AggregatorState& state, const LabeledSample& z, const ScoreDirection& direction,
                 const Schedule& schedule) {
  const std::size_t m = state.dimension();
  const std::size_t i = state.step + 1;
  const double gamma = schedule.gamma_at(i);
  const double beta = schedule.beta_at(i);

  std::vector<double> dir(m);
  direction(z, state.mirrored, dir);

  for (std::size_t j = 0; j < m; ++j) state.weighted_sum[j] += gamma * state.mirrored[j];
  state.gamma_total += gamma;
  state.scores.add_scaled(dir, gamma);
  state.mirrored = gibbs_map(state.scores, beta);
  state.step = i;
}

namespace {

ScoreDirection gradient_direction(const LossSpec& spec, const Dictionary& dict) {
  if (!spec.differentiable()) throw NotDifferentiableError("mirror averaging needs a differentiable loss");
  return [&spec, &dict](const LabeledSample& z, const SimplexWeights& theta, std::span<double> out) {
    dict.evaluate_all(z.x, out);
    const double scale = loss_derivative(spec, z.y, dot(theta.values(), out));
    for (double& v : out) v *= scale;
  };
}

ScoreDirection linearized_direction(const LossSpec& spec, const Dictionary& dict) {
  return [&spec, &dict](const LabeledSample& z, const SimplexWeights&, std::span<double> out) {
    dict.evaluate_all(z.x, out);
    for (double& v : out) v = loss_value(spec, z, v);
  };
}

}  // namespace

AggregatorState ma_step(const AggregatorState& state, const LabeledSample& z, const LossSpec& spec,
                        const Dictionary& dict, const Schedule& schedule) {
  if (state.dimension() != dict.size()) throw InputError("state and dictionary differ in dimension");
  validate_label(spec, z.y);
  AggregatorState next = state;
  mirror_step(next, z, gradient_direction(spec, dict), schedule);
  return next;
}

AggregateResult mirror_average(std::span<const LabeledSample> data, std::size_t m,
                               const ScoreDirection& direction, const Schedule& schedule) {
  if (data.empty()) throw InputError("aggregation needs at least one sample");
  AggregatorState state = ma_init(m);
  for (const auto& z : data) mirror_step(state, z, direction, schedule);
  SimplexWeights weights = state.averaged();
  return AggregateResult{std::move(weights), std::move(state)};
}

AggregateResult ma_run(std::span<const LabeledSample> data, const LossSpec& spec, const Dictionary& dict,
                       const Schedule& schedule) {
  for (const auto& z : data) validate_label(spec, z.y);
  return mirror_average(data, dict.size(), gradient_direction(spec, dict), schedule);
}

AggregateResult lma_run(std::span<const LabeledSample> data, const LossSpec& spec, const Dictionary& dict,
                        double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ParameterError("LMA temperature must be positive and finite");
  return mirror_average(data, dict.size(), linearized_direction(spec, dict), Schedule::constant(beta, 1.0));
}

std::vector<double> empirical_risks(std::span<const LabeledSample> data, const LossSpec& spec,
                                    const Dictionary& dict) {
  if (data.empty()) throw InputError("empirical risk needs at least one sample");
  const std::size_t m = dict.size();
  std::vector<CompensatedSum> sums(m);
  std::vector<double> values(m);
  for (const auto& z : data) {
    dict.evaluate_all(z.x, values);
    for (std::size_t j = 0; j < m; ++j) sums[j].add(loss_value(spec, z, values[j]));
  }
  std::vector<double> risks(m);
  const double n = static_cast<double>(data.size());
  for (std::size_t j = 0; j < m; ++j) risks[j] = sums[j].value() / n;
  return risks;
}

ErmSelection erm_select(std::span<const LabeledSample> data, const LossSpec& spec, const Dictionary& dict) {
  const auto risks = empirical_risks(data, spec, dict);
  ErmSelection best{0, risks[0]};
  for (std::size_t j = 1; j < risks.size(); ++j) {
    if (risks[j] < best.empirical_risk) best = {j, risks[j]};
  }
  return best;
}

}  // namespace mirror_agg
