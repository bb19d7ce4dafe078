#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "mirror_agg/losses.hpp"
#include "mirror_agg/simplex.hpp"

namespace mirror_agg {

/// Step sizes gamma_i and temperatures beta_i, i >= 1.
class Schedule {
 public:
  enum class Kind { constant, sqrt_growth, custom };
  using Sequence = std::function<double(std::size_t)>;

  /// beta_i = beta, gamma_i = gamma.
  static Schedule constant(double beta, double gamma = 1.0);
  /// beta_i = beta0 * sqrt(i), gamma_i = gamma.
  static Schedule sqrt_growth(double beta0, double gamma = 1.0);
  static Schedule custom(Sequence beta, Sequence gamma);
  /// gamma = 1, beta_i = sqrt(Q* / ln M) * sqrt(i).
  static Schedule default_for(const LossSpec& spec, double range_bound, std::size_t m);

  Kind kind() const { return kind_; }
  /// Throws ParameterError for i = 0 or a non-positive / non-finite value.
  double beta_at(std::size_t i) const;
  double gamma_at(std::size_t i) const;

 private:
  Schedule(Kind kind, Sequence beta, Sequence gamma)
      : kind_(kind), beta_(std::move(beta)), gamma_(std::move(gamma)) {}

  Kind kind_;
  Sequence beta_;
  Sequence gamma_;
};

/// Running state of the mirror-averaging recursion after `step` samples.
struct AggregatorState {
  std::size_t step = 0;
  ScoreVector scores;                 // zeta_i
  SimplexWeights mirrored;            // theta-bar_i
  std::vector<double> weighted_sum;   // sum_{t<=i} gamma_t theta-bar_{t-1}
  double gamma_total = 0.0;           // sum_{t<=i} gamma_t

  std::size_t dimension() const { return scores.size(); }
  /// theta-tilde_i = weighted_sum / gamma_total. Throws InputError at step 0.
  SimplexWeights averaged() const;

  friend bool operator==(const AggregatorState&, const AggregatorState&) = default;
};

/// Direction added to the scores for one sample, evaluated at the current
/// mirrored weights: the theta-gradient for MA, u(z) for LMA.
using ScoreDirection =
    std::function<void(const LabeledSample& z, const SimplexWeights& mirrored, std::span<double> out)>;

/// zeta_0 = 0, theta-bar_0 = uniform, empty accumulator.
AggregatorState ma_init(std::size_t m);

/// One GRADIENT DESCENT / MIRRORING / AVERAGING step with an arbitrary
/// score direction. The accumulator receives the pre-update weights.
void mirror_step(AggregatorState& state, const LabeledSample& z, const ScoreDirection& direction,
                 const Schedule& schedule);

/// One MA step: direction = grad_theta Q(z, f_theta) at theta-bar_{i-1}.
AggregatorState ma_step(const AggregatorState& state, const LabeledSample& z, const LossSpec& spec,
                        const Dictionary& dict, const Schedule& schedule);

/// The aggregate theta-tilde_n and its mixture predictor f_{theta-tilde_n}.
struct AggregateResult {
  SimplexWeights weights;
  AggregatorState final_state;

  double predict(const Dictionary& dict, DesignPoint x) const { return mixture_value(weights, dict, x); }
};

/// Folds mirror_step over data with an arbitrary direction.
AggregateResult mirror_average(std::span<const LabeledSample> data, std::size_t m,
                               const ScoreDirection& direction, const Schedule& schedule);

/// Mirror averaging on the loss gradient. Throws InputError for empty data,
/// NotDifferentiableError for hinge.
AggregateResult ma_run(std::span<const LabeledSample> data, const LossSpec& spec, const Dictionary& dict,
                       const Schedule& schedule);

/// Linearized mirror averaging: scores accumulate u(z), gamma = 1, beta fixed.
AggregateResult lma_run(std::span<const LabeledSample> data, const LossSpec& spec, const Dictionary& dict,
                        double beta);

struct ErmSelection {
  std::size_t index = 0;
  double empirical_risk = 0.0;
};

/// Empirical risk minimizer over the dictionary; ties go to the lowest index.
ErmSelection erm_select(std::span<const LabeledSample> data, const LossSpec& spec, const Dictionary& dict);

/// Per-element empirical risks (1/n) sum_i Q(z_i, f_j).
std::vector<double> empirical_risks(std::span<const LabeledSample> data, const LossSpec& spec,
                                    const Dictionary& dict);

}  // namespace mirror_agg
