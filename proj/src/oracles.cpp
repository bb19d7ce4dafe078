#include "mirror_agg/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mirror_agg/errors.hpp"

namespace mirror_agg {

FiniteDistribution::FiniteDistribution(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw InputError("finite distribution needs at least one atom");
  CompensatedSum total;
  cumulative_.reserve(atoms_.size());
  for (const auto& a : atoms_) {
    if (!(a.probability > 0.0) || !std::isfinite(a.probability)) {
      throw InputError("atom probabilities must be positive and finite");
    }
    total.add(a.probability);
    cumulative_.push_back(total.value());
  }
  if (std::abs(total.value() - 1.0) > 1e-12) {
    throw InputError("atom probabilities sum to " + std::to_string(total.value()) + ", expected 1");
  }
}

void FiniteDistribution::validate_for(const LossSpec& spec, std::size_t design_size) const {
  for (const auto& a : atoms_) {
    validate_label(spec, a.z.y);
    if (a.z.x >= design_size) throw InputError("atom design point outside the dictionary's design");
  }
}

const LabeledSample& FiniteDistribution::sample(Rng& rng) const {
  const double u = uniform01(rng) * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto a = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), atoms_.size() - 1);
  return atoms_[a].z;
}

std::vector<LabeledSample> FiniteDistribution::sample(Rng& rng, std::size_t n) const {
  std::vector<LabeledSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample(rng));
  return out;
}

std::string_view to_string(OracleKind kind) { return kind == OracleKind::MS ? "MS" : "C"; }

double exact_risk(std::size_t j, const Dictionary& dict, const LossSpec& spec, const FiniteDistribution& dist) {
  if (j >= dict.size()) throw InputError("dictionary index out of range");
  CompensatedSum risk;
  for (const auto& a : dist.atoms()) risk.add(a.probability * loss_value(spec, a.z, dict.evaluate(j, a.z.x)));
  return risk.value();
}

double exact_risk_raw(std::span<const double> theta, const Dictionary& dict, const LossSpec& spec,
                      const FiniteDistribution& dist) {
  if (theta.size() != dict.size()) throw InputError("weights and dictionary differ in dimension");
  std::vector<double> values(dict.size());
  CompensatedSum risk;
  for (const auto& a : dist.atoms()) {
    dict.evaluate_all(a.z.x, values);
    risk.add(a.probability * loss_value(spec, a.z, dot(theta, values)));
  }
  return risk.value();
}

double exact_risk(const SimplexWeights& theta, const Dictionary& dict, const LossSpec& spec,
                  const FiniteDistribution& dist) {
  return exact_risk_raw(theta.values(), dict, spec, dist);
}

std::vector<double> vertex_risks(const Dictionary& dict, const LossSpec& spec, const FiniteDistribution& dist) {
  std::vector<double> risks(dict.size());
  for (std::size_t j = 0; j < dict.size(); ++j) risks[j] = exact_risk(j, dict, spec, dist);
  return risks;
}

RiskReport ms_oracle(const Dictionary& dict, const LossSpec& spec, const FiniteDistribution& dist) {
  const auto risks = vertex_risks(dict, spec, dist);
  std::size_t best = 0;
  for (std::size_t j = 1; j < risks.size(); ++j) {
    if (risks[j] < risks[best]) best = j;
  }
  return RiskReport{risks[best], OracleKind::MS, best, 0.0};
}

namespace {

// dQ/df with the left subgradient -y at the hinge kink; any subgradient
// keeps the Frank-Wolfe certificate valid.
double subgradient(const LossSpec& spec, double y, double f) {
  if (spec.kind == LossKind::phi_hinge) return y * f <= 1.0 ? -y : 0.0;
  return loss_derivative(spec, y, f);
}

double second_derivative(const LossSpec& spec, double y, double f) {
  switch (spec.kind) {
    case LossKind::squared: return 2.0;
    case LossKind::phi_exponential: return std::exp(-y * f);
    case LossKind::phi_logit2: {
      const double m = -y * f;
      const double s = m >= 0.0 ? 1.0 / (1.0 + std::exp(-m)) : std::exp(m) / (1.0 + std::exp(m));
      return s * (1.0 - s) / std::numbers::ln2;
    }
    case LossKind::phi_hinge: return 0.0;
  }
  return 0.0;
}

// Tabulated view of the problem: values[a * m + j] = f_j(x_a).
struct AtomTable {
  std::size_t m;
  std::vector<double> values;
  std::vector<double> prob;
  std::vector<double> y;

  AtomTable(const Dictionary& dict, const FiniteDistribution& dist) : m(dict.size()) {
    values.resize(dist.size() * m);
    for (std::size_t a = 0; a < dist.size(); ++a) {
      dict.evaluate_all(dist[a].z.x, std::span<double>(values.data() + a * m, m));
      prob.push_back(dist[a].probability);
      y.push_back(dist[a].z.y);
    }
  }
  std::size_t atoms() const { return prob.size(); }
  double at(std::size_t a, std::size_t j) const { return values[a * m + j]; }
};

std::vector<double> gradient_at(const AtomTable& t, const LossSpec& spec, std::span<const double> mixture) {
  std::vector<CompensatedSum> g(t.m);
  for (std::size_t a = 0; a < t.atoms(); ++a) {
    const double w = t.prob[a] * subgradient(spec, t.y[a], mixture[a]);
    if (w == 0.0) continue;
    for (std::size_t j = 0; j < t.m; ++j) g[j].add(w * t.at(a, j));
  }
  std::vector<double> out(t.m);
  for (std::size_t j = 0; j < t.m; ++j) out[j] = g[j].value();
  return out;
}

double risk_of(const AtomTable& t, const LossSpec& spec, std::span<const double> mixture) {
  CompensatedSum r;
  for (std::size_t a = 0; a < t.atoms(); ++a) r.add(t.prob[a] * loss_value(spec, {0, t.y[a]}, mixture[a]));
  return r.value();
}

// Minimizes gamma -> R(mixture + gamma * delta) on [0, gamma_max].
double line_search(const AtomTable& t, const LossSpec& spec, std::span<const double> mixture,
                   std::span<const double> delta, double gamma_max) {
  auto slope = [&](double gamma) {
    CompensatedSum s;
    for (std::size_t a = 0; a < t.atoms(); ++a) {
      if (delta[a] == 0.0) continue;
      s.add(t.prob[a] * subgradient(spec, t.y[a], mixture[a] + gamma * delta[a]) * delta[a]);
    }
    return s.value();
  };
  auto curvature = [&](double gamma) {
    CompensatedSum s;
    for (std::size_t a = 0; a < t.atoms(); ++a) {
      s.add(t.prob[a] * second_derivative(spec, t.y[a], mixture[a] + gamma * delta[a]) * delta[a] * delta[a]);
    }
    return s.value();
  };

  if (slope(gamma_max) <= 0.0) return gamma_max;
  if (slope(0.0) >= 0.0) return 0.0;

  // Safeguarded Newton on the monotone slope; bisection when Newton leaves
  // the bracket or the loss has no curvature (hinge).
  double lo = 0.0;
  double hi = gamma_max;
  double gamma = 0.5 * gamma_max;
  for (int it = 0; it < 200 && hi - lo > 1e-17 * gamma_max; ++it) {
    const double s = slope(gamma);
    if (s == 0.0) return gamma;
    (s < 0.0 ? lo : hi) = gamma;
    double next = 0.5 * (lo + hi);
    if (spec.differentiable()) {
      const double c = curvature(gamma);
      if (c > 0.0) {
        const double newton = gamma - s / c;
        if (newton > lo && newton < hi) next = newton;
      }
    }
    if (next == gamma) break;
    gamma = next;
  }
  return gamma;
}

}  // namespace

std::vector<double> risk_gradient(std::span<const double> theta, const Dictionary& dict, const LossSpec& spec,
                                  const FiniteDistribution& dist) {
  if (theta.size() != dict.size()) throw InputError("weights and dictionary differ in dimension");
  const AtomTable t(dict, dist);
  std::vector<double> mixture(t.atoms());
  for (std::size_t a = 0; a < t.atoms(); ++a) mixture[a] = dot(theta, std::span(t.values).subspan(a * t.m, t.m));
  return gradient_at(t, spec, mixture);
}

double frank_wolfe_gap(std::span<const double> theta, std::span<const double> gradient) {
  const double lowest = *std::min_element(gradient.begin(), gradient.end());
  CompensatedSum gap;
  for (std::size_t j = 0; j < theta.size(); ++j) gap.add(theta[j] * (gradient[j] - lowest));
  return std::max(0.0, gap.value());
}

RiskReport c_oracle(const Dictionary& dict, const LossSpec& spec, const FiniteDistribution& dist,
                    const COracleOptions& options) {
  if (!(options.tolerance > 0.0)) throw ParameterError("C-oracle tolerance must be positive");
  const AtomTable t(dict, dist);
  const std::size_t m = t.m;

  const RiskReport start = ms_oracle(dict, spec, dist);
  std::vector<double> theta(m, 0.0);
  theta[std::get<std::size_t>(start.minimizer)] = 1.0;

  std::vector<double> mixture(t.atoms());
  for (std::size_t a = 0; a < t.atoms(); ++a) mixture[a] = t.at(a, std::get<std::size_t>(start.minimizer));
  std::vector<double> delta(t.atoms());

  double gap = 0.0;
  for (std::size_t it = 0; it <= options.max_iterations; ++it) {
    const auto g = gradient_at(t, spec, mixture);
    gap = frank_wolfe_gap(theta, g);
    if (gap <= options.tolerance) {
      return RiskReport{risk_of(t, spec, mixture), OracleKind::C, renormalize(theta), gap};
    }
    if (it == options.max_iterations) break;

    // Pairwise direction: toward the best vertex, away from the worst
    // vertex in the support.
    const auto toward = static_cast<std::size_t>(std::min_element(g.begin(), g.end()) - g.begin());
    std::size_t away = toward;
    for (std::size_t j = 0; j < m; ++j) {
      if (theta[j] > 0.0 && (away == toward || g[j] > g[away])) away = j;
    }
    if (away == toward) break;

    for (std::size_t a = 0; a < t.atoms(); ++a) delta[a] = t.at(a, toward) - t.at(a, away);
    const double gamma_max = theta[away];
    const double gamma = line_search(t, spec, mixture, delta, gamma_max);
    if (gamma == gamma_max) {
      theta[toward] += theta[away];
      theta[away] = 0.0;
    } else {
      theta[toward] += gamma;
      theta[away] -= gamma;
    }
    // Recompute the mixture from theta to keep rounding from drifting.
    for (std::size_t a = 0; a < t.atoms(); ++a) mixture[a] = dot(theta, std::span(t.values).subspan(a * m, m));
  }
  throw ConvergenceError("C-oracle did not reach tolerance " + std::to_string(options.tolerance) +
                             " (gap " + std::to_string(gap) + ")",
                         theta, risk_of(t, spec, mixture), gap);
}

double optimal_rate(std::size_t n, std::size_t m, OracleKind kind) {
  if (n < 1) throw ParameterError("optimal rate needs n >= 1");
  if (m < 2) throw ParameterError("optimal rate needs M >= 2");
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  if (kind == OracleKind::MS) return std::log(md) / nd;
  // M <= sqrt(n) compared in integers so the boundary is exact.
  if (m * m <= n) return md / nd;
  return std::sqrt(std::log(md / std::sqrt(nd) + 1.0) / nd);
}

double excess_risk(double achieved_risk, const RiskReport& oracle) { return achieved_risk - oracle.risk; }

}  // namespace mirror_agg
