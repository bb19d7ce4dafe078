#include "mirror_agg/conditions.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "mirror_agg/aggregation.hpp"
#include "mirror_agg/errors.hpp"
#include "mirror_agg/numeric.hpp"

namespace mirror_agg {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::satisfied: return "satisfied";
    case Verdict::violated: return "violated";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

ThetaLoss mixture_loss(const LossSpec& spec, const Dictionary& dict) {
  return [spec, &dict](const LabeledSample& z, std::span<const double> theta) {
    std::vector<double> values(dict.size());
    dict.evaluate_all(z.x, values);
    return loss_value(spec, z, dot(theta, values));
  };
}

ThetaLoss linearized_loss(const LossSpec& spec, const Dictionary& dict) {
  return [spec, &dict](const LabeledSample& z, std::span<const double> theta) {
    return dot(theta, linearized_loss_vector(spec, dict, z));
  };
}

double condition4_integrand(const LossSpec& spec, const Dictionary& dict, const SimplexWeights& theta,
                            const LabeledSample& z, double beta) {
  const std::size_t m = dict.size();
  std::vector<double> values(m);
  dict.evaluate_all(z.x, values);
  const double mixture = loss_value(spec, z, dot(theta.values(), values));

  std::vector<double> scaled(m);
  double largest = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m; ++j) {
    scaled[j] = (mixture - loss_value(spec, z, values[j])) / beta;
    if (theta[j] > 0.0) largest = std::max(largest, std::abs(scaled[j]));
  }
  // log(1 + sum_j theta_j expm1(s_j)) is exact (0) for a degenerate
  // dictionary and accurate when beta is large; fall back to log-sum-exp
  // once the exponents are no longer small.
  if (largest <= 1.0) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (theta[j] > 0.0) acc += theta[j] * std::expm1(scaled[j]);
    }
    return std::log1p(acc);
  }
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m; ++j) {
    if (theta[j] > 0.0) top = std::max(top, scaled[j] + std::log(theta[j]));
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    if (theta[j] > 0.0) acc += std::exp(scaled[j] + std::log(theta[j]) - top);
  }
  return top + std::log(acc);
}

ConditionVerdict check_condition4(const LossSpec& spec, const Dictionary& dict, const FiniteDistribution& dist,
                                  double beta, std::size_t n, std::size_t mc_outer, std::uint64_t seed,
                                  int jobs) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ParameterError("beta must be positive and finite");
  if (mc_outer < 100) throw ParameterError("condition (4) check needs at least 100 outer replicates");
  if (n < 1) throw ParameterError("training size must be at least 1");
  dist.validate_for(spec, dict.design_size());

  std::vector<double> values(mc_outer);
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  const auto reps = static_cast<std::int64_t>(mc_outer);

#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
  for (std::int64_t r = 0; r < reps; ++r) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    const auto sample = dist.sample(rng, n);
    const auto aggregate = lma_run(sample, spec, dict, beta);
    const LabeledSample& z = dist.sample(rng);
    values[static_cast<std::size_t>(r)] = condition4_integrand(spec, dict, aggregate.weights, z, beta);
  }

  CompensatedSum total;
  for (double v : values) total.add(v);
  const double mean = total.value() / static_cast<double>(mc_outer);
  CompensatedSum squares;
  for (double v : values) squares.add((v - mean) * (v - mean));
  const double sd = std::sqrt(squares.value() / static_cast<double>(mc_outer - 1));
  const double se = sd / std::sqrt(static_cast<double>(mc_outer));

  Verdict verdict = Verdict::inconclusive;
  if (mean + 2.0 * se <= 0.0) {
    verdict = Verdict::satisfied;
  } else if (mean - 2.0 * se > 0.0) {
    verdict = Verdict::violated;
  }
  return ConditionVerdict{mean, se, verdict, mc_outer, std::nullopt};
}

double exponential_moment(const ThetaLoss& loss, const FiniteDistribution& dist, std::span<const double> theta_ref,
                          std::span<const double> theta, double beta) {
  CompensatedSum h;
  for (const auto& a : dist.atoms()) {
    h.add(a.probability * std::exp((loss(a.z, theta_ref) - loss(a.z, theta)) / beta));
  }
  return h.value();
}

namespace {

// Mixes dense Dirichlet(1) draws with edge and vertex draws so that
// curvature along simplex edges is probed as well as the interior.
std::vector<double> random_simplex_point(Rng& rng, std::size_t m) {
  std::vector<double> w(m, 0.0);
  const double kind = uniform01(rng);
  if (kind < 0.15) {
    w[uniform_index(rng, m)] = 1.0;
  } else if (kind < 0.45) {
    const std::size_t a = uniform_index(rng, m);
    std::size_t b = uniform_index(rng, m - 1);
    if (b >= a) ++b;
    const double t = uniform01(rng);
    w[a] = t;
    w[b] = 1.0 - t;
  } else {
    double total = 0.0;
    for (double& v : w) {
      v = -std::log1p(-uniform01(rng));
      total += v;
    }
    for (double& v : w) v /= total;
  }
  return w;
}

}  // namespace

ConditionVerdict check_concavity6(const ThetaLoss& loss, std::size_t m, const FiniteDistribution& dist,
                                  double beta, const SimplexWeights& theta_ref, std::size_t trials,
                                  std::uint64_t seed) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ParameterError("beta must be positive and finite");
  if (trials < 1000) throw ParameterError("concavity check needs at least 1000 trials");
  if (theta_ref.size() != m) throw InputError("reference weights have the wrong dimension");

  Rng rng(derive_seed(seed, {0x636f6e636176ULL}));
  ConditionVerdict out;
  out.estimate = -std::numeric_limits<double>::infinity();
  out.samples_used = trials;

  std::vector<double> mid(m);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto a = random_simplex_point(rng, m);
    const auto b = random_simplex_point(rng, m);
    for (std::size_t j = 0; j < m; ++j) mid[j] = 0.5 * (a[j] + b[j]);
    const double ha = exponential_moment(loss, dist, theta_ref.values(), a, beta);
    const double hb = exponential_moment(loss, dist, theta_ref.values(), b, beta);
    const double hm = exponential_moment(loss, dist, theta_ref.values(), mid, beta);
    const double violation = 0.5 * (ha + hb) - hm;
    if (violation > out.estimate) {
      out.estimate = violation;
      if (violation > 1e-12) out.counterexample.emplace(renormalize(a), renormalize(b));
    }
  }
  out.verdict = out.counterexample ? Verdict::violated : Verdict::satisfied;
  return out;
}

ConditionVerdict check_concavity6(const LossSpec& spec, const Dictionary& dict, const FiniteDistribution& dist,
                                  double beta, const SimplexWeights& theta_ref, std::size_t trials,
                                  std::uint64_t seed) {
  dist.validate_for(spec, dict.design_size());
  return check_concavity6(mixture_loss(spec, dict), dict.size(), dist, beta, theta_ref, trials, seed);
}

NiceBetaReport nice_beta_report(LossKind kind) {
  const double computed = minimal_nice_beta(kind);
  std::optional<double> reference;
  if (kind == LossKind::phi_exponential) reference = std::numbers::e;
  if (kind == LossKind::phi_logit2) reference = std::numbers::e * std::numbers::ln2;
  const bool agrees = reference && std::abs(*reference - computed) <= 1e-6;
  return NiceBetaReport{kind, computed, reference, agrees};
}

}  // namespace mirror_agg
