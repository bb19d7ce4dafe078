#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <utility>

#include "mirror_agg/losses.hpp"
#include "mirror_agg/oracles.hpp"
#include "mirror_agg/simplex.hpp"

namespace mirror_agg {

enum class Verdict { satisfied, violated, inconclusive };
std::string_view to_string(Verdict v);

/// Outcome of a numerical check. For the exponential-moment condition the
/// estimate is a Monte Carlo mean with its standard error; for the midpoint
/// concavity test it is the largest observed violation (<= 0 when none).
struct ConditionVerdict {
  double estimate = 0.0;
  double std_error = 0.0;
  Verdict verdict = Verdict::inconclusive;
  std::size_t samples_used = 0;
  /// Offending (theta1, theta2) pair when a midpoint test fails.
  std::optional<std::pair<SimplexWeights, SimplexWeights>> counterexample;
};

/// Loss as a function of the full weight vector, theta -> Q(z, theta).
using ThetaLoss = std::function<double(const LabeledSample& z, std::span<const double> theta)>;

/// Q(z, f_theta).
ThetaLoss mixture_loss(const LossSpec& spec, const Dictionary& dict);
/// The surrogate linear loss theta^T u(z).
ThetaLoss linearized_loss(const LossSpec& spec, const Dictionary& dict);

/// Monte Carlo estimate of
///   E log( sum_j theta_j exp[(Q(Z, f_theta) - Q(Z, f_j)) / beta] ),
/// theta = LMA output on a fresh size-n sample, Z an independent draw. The
/// inner expectation over the random index is computed exactly.
/// satisfied iff estimate + 2 se <= 0, violated iff estimate - 2 se > 0.
/// Replicates run in parallel on `jobs` threads (0 = OpenMP default); the
/// result does not depend on jobs.
ConditionVerdict check_condition4(const LossSpec& spec, const Dictionary& dict, const FiniteDistribution& dist,
                                  double beta, std::size_t n, std::size_t mc_outer, std::uint64_t seed,
                                  int jobs = 0);

/// One replicate of the above for a given weight vector and test point.
double condition4_integrand(const LossSpec& spec, const Dictionary& dict, const SimplexWeights& theta,
                            const LabeledSample& z, double beta);

/// h(theta) = sum_a p_a exp((Q(z_a, theta') - Q(z_a, theta)) / beta).
double exponential_moment(const ThetaLoss& loss, const FiniteDistribution& dist, std::span<const double> theta_ref,
                          std::span<const double> theta, double beta);

/// Randomized midpoint-concavity test of h on the simplex:
/// h((t1+t2)/2) >= (h(t1) + h(t2))/2 - 1e-12 for `trials` random pairs.
/// Any failure yields violated together with the pair.
ConditionVerdict check_concavity6(const ThetaLoss& loss, std::size_t m, const FiniteDistribution& dist,
                                  double beta, const SimplexWeights& theta_ref, std::size_t trials,
                                  std::uint64_t seed);
ConditionVerdict check_concavity6(const LossSpec& spec, const Dictionary& dict, const FiniteDistribution& dist,
                                  double beta, const SimplexWeights& theta_ref, std::size_t trials,
                                  std::uint64_t seed);

/// Computed curvature constant next to the published one.
struct NiceBetaReport {
  LossKind kind;
  double computed_beta;
  std::optional<double> reference_beta;
  bool agrees;
};

/// Throws NotDifferentiableError for losses where the criterion is
/// inapplicable (hinge, squared).
NiceBetaReport nice_beta_report(LossKind kind);

}  // namespace mirror_agg
