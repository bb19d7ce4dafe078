#include <algorithm>
#include <cmath>
#include <string>

#include "mirror_agg/errors.hpp"
#include "mirror_agg/experiments.hpp"
#include "mirror_agg/numeric.hpp"

namespace mirror_agg {

std::string_view to_string(GeneratorFamily f) {
  switch (f) {
    case GeneratorFamily::bounded_regression: return "bounded_regression";
    case GeneratorFamily::phi_classification: return "phi_classification";
    case GeneratorFamily::margin_classification: return "margin_classification";
    case GeneratorFamily::near_tie: return "near_tie";
  }
  return "unknown";
}

GeneratorFamily parse_generator_family(std::string_view name) {
  for (auto f : {GeneratorFamily::bounded_regression, GeneratorFamily::phi_classification,
                 GeneratorFamily::margin_classification, GeneratorFamily::near_tie}) {
    if (name == to_string(f)) return f;
  }
  throw InputError("unknown generator family '" + std::string(name) + "'");
}

std::string_view to_string(DictionaryRecipe r) {
  return r == DictionaryRecipe::biased ? "biased" : "contains_truth";
}

DictionaryRecipe parse_dictionary_recipe(std::string_view name) {
  if (name == "biased") return DictionaryRecipe::biased;
  if (name == "contains_truth") return DictionaryRecipe::contains_truth;
  throw InputError("unknown dictionary recipe '" + std::string(name) + "'");
}

void GeneratorSpec::validate() const {
  if (grid_size < 1) throw ParameterError("grid_size must be at least 1");
  if (!(noise_level >= 0.0) || noise_level > 1.0) throw ParameterError("noise_level must lie in [0, 1]");
  if (!(margin_exponent >= 1.0) || !std::isfinite(margin_exponent)) {
    throw ParameterError("margin_exponent (kappa) must satisfy kappa >= 1, got " + std::to_string(margin_exponent));
  }
  if (!(tie_gap >= 0.0) || tie_gap > 1.0) throw ParameterError("tie_gap (delta) must lie in [0, 1]");
}

namespace {

// Bounded-regression dictionary geometry.
constexpr double kBestOffset = 0.3;
constexpr double kShiftLow = 0.3;
constexpr double kShiftHigh = 0.6;
constexpr double kWiggle = 0.15;
constexpr double kTruthPerturbation = 0.5;
// Classification regression functions stay in [0.1, 0.9].
constexpr double kMargin = 0.4;
// Closest constant in the near-tie family sits this far from E[Y].
constexpr double kTieOffset = 0.2;

double clip1(double v) { return std::clamp(v, -1.0, 1.0); }

// Fisher-Yates with the portable index draw.
void shuffle_columns(std::vector<std::vector<double>>& cols, Rng& rng) {
  for (std::size_t i = cols.size(); i > 1; --i) std::swap(cols[i - 1], cols[uniform_index(rng, i)]);
}

// Y = f*(x) +- sigma with equal probability, clipped to [-1, 1].
std::vector<Atom> two_point_noise_atoms(const std::vector<double>& truth, double sigma) {
  const std::size_t k = truth.size();
  std::vector<Atom> atoms;
  if (sigma == 0.0) {
    for (std::size_t x = 0; x < k; ++x) atoms.push_back({{x, truth[x]}, 1.0 / static_cast<double>(k)});
    return atoms;
  }
  const double p = 0.5 / static_cast<double>(k);
  for (std::size_t x = 0; x < k; ++x) {
    atoms.push_back({{x, clip1(truth[x] + sigma)}, p});
    atoms.push_back({{x, clip1(truth[x] - sigma)}, p});
  }
  return atoms;
}

std::vector<double> conditional_mean(const std::vector<Atom>& atoms, std::size_t k) {
  std::vector<double> num(k, 0.0), den(k, 0.0);
  for (const auto& a : atoms) {
    num[a.z.x] += a.probability * a.z.y;
    den[a.z.x] += a.probability;
  }
  for (std::size_t x = 0; x < k; ++x) num[x] /= den[x];
  return num;
}

std::vector<Atom> label_atoms(const std::vector<double>& eta) {
  const double p = 1.0 / static_cast<double>(eta.size());
  std::vector<Atom> atoms;
  for (std::size_t x = 0; x < eta.size(); ++x) {
    atoms.push_back({{x, 1.0}, p * eta[x]});
    atoms.push_back({{x, -1.0}, p * (1.0 - eta[x])});
  }
  return atoms;
}

Instance bounded_regression(const GeneratorSpec& spec, std::size_t m, Rng& rng) {
  const std::size_t k = spec.grid_size;
  std::vector<double> truth(k);
  for (double& v : truth) v = uniform(rng, -0.5, 0.5);

  std::vector<std::vector<double>> cols;
  if (spec.recipe == DictionaryRecipe::contains_truth) {
    cols.push_back(truth);
    for (std::size_t j = 1; j < m; ++j) {
      std::vector<double> f(k);
      for (std::size_t x = 0; x < k; ++x) f[x] = clip1(truth[x] + uniform(rng, -kTruthPerturbation, kTruthPerturbation));
      cols.push_back(std::move(f));
    }
  } else {
    // Direction pointing from f* toward (and past) zero keeps everything in
    // [-1, 1]; every other element moves further along it, so moving weight
    // off f_1 strictly increases the risk to first order.
    std::vector<double> dir(k);
    for (std::size_t x = 0; x < k; ++x) dir[x] = truth[x] >= 0.0 ? -1.0 : 1.0;
    std::vector<double> best(k);
    for (std::size_t x = 0; x < k; ++x) best[x] = truth[x] + kBestOffset * dir[x];
    cols.push_back(best);
    for (std::size_t j = 1; j < m; ++j) {
      std::vector<double> wiggle(k);
      double along = 0.0;
      for (std::size_t x = 0; x < k; ++x) {
        wiggle[x] = uniform(rng, -1.0, 1.0);
        along += wiggle[x] * dir[x];
      }
      along /= static_cast<double>(k);  // dir . dir = k
      const double shift = uniform(rng, kShiftLow, kShiftHigh);
      std::vector<double> f(k);
      for (std::size_t x = 0; x < k; ++x) {
        f[x] = clip1(best[x] + shift * dir[x] + kWiggle * (wiggle[x] - along * dir[x]));
      }
      cols.push_back(std::move(f));
    }
  }
  shuffle_columns(cols, rng);

  auto atoms = two_point_noise_atoms(truth, spec.noise_level);
  auto regression = conditional_mean(atoms, k);
  return Instance{FiniteDistribution(std::move(atoms)), std::make_shared<TabulatedDictionary>(cols, 1.0),
                  std::move(regression)};
}

Instance phi_classification(const GeneratorSpec& spec, std::size_t m, Rng& rng) {
  const std::size_t k = spec.grid_size;
  std::vector<double> eta(k);
  for (double& v : eta) v = uniform(rng, 0.5 - kMargin, 0.5 + kMargin);

  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < m; ++j) {
    const double agreement = uniform(rng, -0.5, 1.5);
    const double jitter = uniform(rng, 0.0, 0.6);
    std::vector<double> f(k);
    for (std::size_t x = 0; x < k; ++x) {
      f[x] = clip1(2.0 * agreement * (2.0 * eta[x] - 1.0) + jitter * uniform(rng, -1.0, 1.0));
    }
    cols.push_back(std::move(f));
  }
  return Instance{FiniteDistribution(label_atoms(eta)), std::make_shared<TabulatedDictionary>(cols, 1.0), eta};
}

// Design x_k = (k + 1/2)/K on (0, 1) with the decision boundary at 1/2 and
// |eta - 1/2| = kMargin * t^(kappa - 1), t = |2x - 1|. kappa = 1 is the hard
// margin |eta - 1/2| = kMargin.
Instance margin_classification(const GeneratorSpec& spec, std::size_t m, Rng& rng) {
  const std::size_t k = spec.grid_size;
  std::vector<double> eta(k);
  std::vector<double> design(k);
  for (std::size_t x = 0; x < k; ++x) {
    design[x] = (static_cast<double>(x) + 0.5) / static_cast<double>(k);
    const double t = std::abs(2.0 * design[x] - 1.0);
    const double side = design[x] >= 0.5 ? 1.0 : -1.0;
    eta[x] = 0.5 + side * kMargin * std::pow(t, spec.margin_exponent - 1.0);
  }

  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < m; ++j) {
    const double threshold = uniform(rng, 0.25, 0.75);
    double steepness = uniform(rng, 2.0, 10.0);
    if (uniform01(rng) < 0.2) steepness = -steepness;
    std::vector<double> f(k);
    for (std::size_t x = 0; x < k; ++x) f[x] = clip1(steepness * (design[x] - threshold));
    cols.push_back(std::move(f));
  }
  return Instance{FiniteDistribution(label_atoms(eta)), std::make_shared<TabulatedDictionary>(cols, 1.0), eta};
}

// Constant predictors c_j = E[Y] +- sqrt(offset^2 + delta j/(M-1)) on
// alternating sides: population risks Var(Y) + offset^2 + delta j/(M-1),
// all within delta of the best.
Instance near_tie(const GeneratorSpec& spec, std::size_t m, Rng& rng) {
  const std::size_t k = spec.grid_size;
  std::vector<double> truth(k);
  for (double& v : truth) v = uniform(rng, -0.5, 0.5);
  auto atoms = two_point_noise_atoms(truth, spec.noise_level);

  CompensatedSum mean;
  for (const auto& a : atoms) mean.add(a.probability * a.z.y);
  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < m; ++j) {
    const double step = spec.tie_gap * static_cast<double>(j) / static_cast<double>(m - 1);
    const double side = j % 2 == 0 ? 1.0 : -1.0;
    cols.emplace_back(k, clip1(mean.value() + side * std::sqrt(kTieOffset * kTieOffset + step)));
  }
  auto regression = conditional_mean(atoms, k);
  return Instance{FiniteDistribution(std::move(atoms)), std::make_shared<TabulatedDictionary>(cols, 1.0),
                  std::move(regression)};
}

}  // namespace

Instance generate_instance(const GeneratorSpec& spec, std::size_t m, std::uint64_t seed) {
  spec.validate();
  if (m < 2) throw ParameterError("dictionary size M must be at least 2");
  Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(spec.family), m}));
  switch (spec.family) {
    case GeneratorFamily::bounded_regression: return bounded_regression(spec, m, rng);
    case GeneratorFamily::phi_classification: return phi_classification(spec, m, rng);
    case GeneratorFamily::margin_classification: return margin_classification(spec, m, rng);
    case GeneratorFamily::near_tie: return near_tie(spec, m, rng);
  }
  throw ParameterError("unknown generator family");
}

}  // namespace mirror_agg
