#include "mirror_agg/losses.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <numbers>

#include "mirror_agg/errors.hpp"

namespace mirror_agg {

namespace {

constexpr double kLn2 = std::numbers::ln2;

std::atomic<bool> g_margin_warning_issued{false};

void warn_margin_range(double f_value) {
  if (std::abs(f_value) > 1.0 && !g_margin_warning_issued.exchange(true)) {
    std::clog << "mirror_agg: warning: phi-loss evaluated at |f| = " << std::abs(f_value)
              << " > 1 (outside the classifier range)\n";
  }
}

// log2(1 + e^m), stable for large |m|.
double logit2_of(double m) {
  if (m > 0.0) return (m + std::log1p(std::exp(-m))) / kLn2;
  return std::log1p(std::exp(m)) / kLn2;
}

// Logistic sigma(m) = e^m / (1 + e^m).
double logistic(double m) {
  if (m >= 0.0) return 1.0 / (1.0 + std::exp(-m));
  const double e = std::exp(m);
  return e / (1.0 + e);
}

}  // namespace

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::squared: return "squared";
    case LossKind::phi_exponential: return "exponential";
    case LossKind::phi_logit2: return "logit2";
    case LossKind::phi_hinge: return "hinge";
  }
  return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name.starts_with("phi_")) name.remove_prefix(4);
  if (name == "squared") return LossKind::squared;
  if (name == "exponential") return LossKind::phi_exponential;
  if (name == "logit2" || name == "logit") return LossKind::phi_logit2;
  if (name == "hinge") return LossKind::phi_hinge;
  throw InputError("unknown loss kind '" + std::string(name) + "'");
}

void LossSpec::validate() const {
  if (!(y_bound > 0.0) || !std::isfinite(y_bound)) throw ParameterError("loss y_bound must be positive and finite");
}

void validate_label(const LossSpec& spec, double y) {
  if (spec.is_phi()) {
    if (y != 1.0 && y != -1.0) throw InputError("phi-loss labels must be -1 or +1, got " + std::to_string(y));
  } else if (!std::isfinite(y)) {
    throw InputError("response must be finite");
  }
}

double loss_value(const LossSpec& spec, const LabeledSample& z, double f_value) {
  validate_label(spec, z.y);
  if (spec.is_phi()) warn_margin_range(f_value);
  const double margin = -z.y * f_value;
  switch (spec.kind) {
    case LossKind::squared: {
      const double r = z.y - f_value;
      return r * r;
    }
    case LossKind::phi_exponential: return std::exp(margin);
    case LossKind::phi_logit2: return logit2_of(margin);
    case LossKind::phi_hinge: return std::max(0.0, 1.0 + margin);
  }
  return 0.0;
}

double loss_derivative(const LossSpec& spec, double y, double f_value) {
  switch (spec.kind) {
    case LossKind::squared: return -2.0 * (y - f_value);
    case LossKind::phi_exponential: return -y * std::exp(-y * f_value);
    case LossKind::phi_logit2: return -y * logistic(-y * f_value) / kLn2;
    case LossKind::phi_hinge: break;
  }
  throw NotDifferentiableError("hinge loss has no gradient");
}

std::vector<double> loss_gradient_theta(const LossSpec& spec, const Dictionary& dict,
                                        const LabeledSample& z, const SimplexWeights& theta) {
  if (!spec.differentiable()) throw NotDifferentiableError("hinge loss has no theta-gradient");
  if (theta.size() != dict.size()) throw InputError("weights and dictionary differ in dimension");
  validate_label(spec, z.y);
  std::vector<double> values(dict.size());
  dict.evaluate_all(z.x, values);
  const double scale = loss_derivative(spec, z.y, dot(theta.values(), values));
  for (double& v : values) v *= scale;
  return values;
}

std::vector<double> linearized_loss_vector(const LossSpec& spec, const Dictionary& dict,
                                           const LabeledSample& z) {
  std::vector<double> values(dict.size());
  dict.evaluate_all(z.x, values);
  for (double& v : values) v = loss_value(spec, z, v);
  return values;
}

double q_star_bound(const LossSpec& spec, double range_bound) {
  if (!spec.differentiable()) throw NotDifferentiableError("Q* bound requires a differentiable loss");
  if (!(range_bound >= 0.0)) throw ParameterError("range bound must be >= 0");
  const double b = range_bound;
  switch (spec.kind) {
    case LossKind::squared: {
      const double g = 2.0 * (spec.y_bound + b) * b;
      return g * g;
    }
    case LossKind::phi_exponential: {
      // |y e^{-y f} f_j| <= e^B B; for B <= 1 report the rounder e^2 B^2.
      const double g = (b <= 1.0 ? std::numbers::e : std::exp(b)) * b;
      return g * g;
    }
    case LossKind::phi_logit2: {
      const double worst = std::max(b, 1.0);
      const double g = logistic(worst) / kLn2 * b;
      return g * g;
    }
    case LossKind::phi_hinge: break;
  }
  return 0.0;
}

double phi(LossKind kind, double x) {
  switch (kind) {
    case LossKind::phi_exponential: return std::exp(x);
    case LossKind::phi_logit2: return logit2_of(x);
    default: break;
  }
  throw NotDifferentiableError("phi is only defined for the exponential and logit2 losses");
}

double phi_prime(LossKind kind, double x) {
  switch (kind) {
    case LossKind::phi_exponential: return std::exp(x);
    case LossKind::phi_logit2: return logistic(x) / kLn2;
    default: break;
  }
  throw NotDifferentiableError("phi' is only defined for the exponential and logit2 losses");
}

double phi_second(LossKind kind, double x) {
  switch (kind) {
    case LossKind::phi_exponential: return std::exp(x);
    case LossKind::phi_logit2: {
      const double s = logistic(x);
      return s * (1.0 - s) / kLn2;
    }
    default: break;
  }
  throw NotDifferentiableError("phi'' is only defined for the exponential and logit2 losses");
}

double minimal_nice_beta(LossKind kind) {
  if (kind != LossKind::phi_exponential && kind != LossKind::phi_logit2) {
    throw NotDifferentiableError(std::string("curvature criterion inapplicable: ") +
                                 std::string(to_string(kind)) + " is not a twice-differentiable phi");
  }
  constexpr int kIntervals = 1'000'000;
  auto ratio = [kind](double x) {
    const double d1 = phi_prime(kind, x);
    return d1 * d1 / phi_second(kind, x);
  };
  auto grid = [](int i) { return -1.0 + 2.0 * static_cast<double>(i) / kIntervals; };

  double sup = 0.0;
  for (int i = 0; i <= kIntervals; ++i) sup = std::max(sup, ratio(grid(i)));

  // Both ratios are increasing (e^x and e^x / ln 2), so the supremum sits at
  // x = 1; take the closed form there.
  const double closed_form = kind == LossKind::phi_exponential ? std::numbers::e : std::numbers::e / kLn2;
  const double beta = std::max(sup, closed_form);

  for (int i = 0; i <= kIntervals; ++i) {
    const double x = grid(i);
    const double d1 = phi_prime(kind, x);
    if (d1 * d1 > beta * phi_second(kind, x) + 1e-9) {
      throw Error("curvature criterion post-check failed at x = " + std::to_string(x));
    }
  }
  return beta;
}

}  // namespace mirror_agg
