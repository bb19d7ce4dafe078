#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mirror_agg/simplex.hpp"

namespace mirror_agg {

enum class LossKind { squared, phi_exponential, phi_logit2, phi_hinge };

std::string_view to_string(LossKind kind);
/// Parses "squared", "exponential", "logit2", "hinge" (also the phi_ forms).
LossKind parse_loss_kind(std::string_view name);

/// Which loss Q is in force. phi-losses are Q(z, f) = phi(-y f(x)) with
/// labels in {-1, +1}; squared loss assumes |y| <= y_bound.
struct LossSpec {
  LossKind kind = LossKind::squared;
  double y_bound = 1.0;

  static LossSpec squared(double y_bound = 1.0) { return {LossKind::squared, y_bound}; }
  static LossSpec phi(LossKind kind) { return {kind, 1.0}; }

  bool is_phi() const { return kind != LossKind::squared; }
  bool differentiable() const { return kind != LossKind::phi_hinge; }

  /// Throws ParameterError when y_bound is not positive and finite.
  void validate() const;
};

struct LabeledSample {
  DesignPoint x = 0;
  double y = 0.0;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

/// Throws InputError unless y is admissible for the loss (label in {-1, +1}
/// for phi-losses, finite otherwise).
void validate_label(const LossSpec& spec, double y);

/// Q(z, f) for a prediction value f = f(x).
double loss_value(const LossSpec& spec, const LabeledSample& z, double f_value);

/// dQ/df at prediction f. Throws NotDifferentiableError for hinge.
double loss_derivative(const LossSpec& spec, double y, double f_value);

/// Gradient of theta -> Q(z, f_theta) via the chain rule through f_theta(x).
std::vector<double> loss_gradient_theta(const LossSpec& spec, const Dictionary& dict,
                                        const LabeledSample& z, const SimplexWeights& theta);

/// u(z) = (Q(z, f_1), ..., Q(z, f_M)). Defined for every loss, hinge included.
std::vector<double> linearized_loss_vector(const LossSpec& spec, const Dictionary& dict,
                                           const LabeledSample& z);

/// Analytic bound Q* >= sup_theta |grad_theta Q(z, f_theta)|_inf^2 for
/// |f_j| <= range_bound (and |y| <= y_bound for squared loss).
double q_star_bound(const LossSpec& spec, double range_bound);

/// phi and its first two derivatives for the twice-differentiable margin
/// losses (phi(x) = e^x, phi(x) = log2(1 + e^x)).
double phi(LossKind kind, double x);
double phi_prime(LossKind kind, double x);
double phi_second(LossKind kind, double x);

/// Smallest beta with phi'(x)^2 <= beta phi''(x) on |x| <= 1: the supremum of
/// phi'^2 / phi'' over a 10^6 + 1 point grid, cross-checked with the closed
/// form at the maximizing endpoint. Throws NotDifferentiableError for hinge
/// and squared loss.
double minimal_nice_beta(LossKind kind);

}  // namespace mirror_agg
