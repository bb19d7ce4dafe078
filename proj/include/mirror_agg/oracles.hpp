#pragma once

#include <cstddef>
#include <string_view>
#include <variant>
#include <vector>

#include "mirror_agg/losses.hpp"
#include "mirror_agg/numeric.hpp"
#include "mirror_agg/simplex.hpp"

namespace mirror_agg {

struct Atom {
  LabeledSample z;
  double probability = 0.0;
};

/// Finite-support law of Z = (X, Y). Probabilities are positive and sum to
/// one within 1e-12.
class FiniteDistribution {
 public:
  explicit FiniteDistribution(std::vector<Atom> atoms);

  std::size_t size() const { return atoms_.size(); }
  const Atom& operator[](std::size_t a) const { return atoms_[a]; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  /// Throws InputError if any atom has a label the loss does not accept or a
  /// design point outside [0, design_size).
  void validate_for(const LossSpec& spec, std::size_t design_size) const;

  /// One i.i.d. draw (inverse CDF on a 53-bit uniform).
  const LabeledSample& sample(Rng& rng) const;
  std::vector<LabeledSample> sample(Rng& rng, std::size_t n) const;

 private:
  std::vector<Atom> atoms_;
  std::vector<double> cumulative_;
};

enum class OracleKind { MS, C };
std::string_view to_string(OracleKind kind);

struct RiskReport {
  double risk = 0.0;
  OracleKind kind = OracleKind::MS;
  /// Dictionary index for MS, weights for C.
  std::variant<std::size_t, SimplexWeights> minimizer;
  /// Certified upper bound on risk - (true oracle risk). Zero for MS.
  double gap_certificate = 0.0;
};

/// R(f_j) = E Q(Z, f_j), compensated summation over atoms.
double exact_risk(std::size_t j, const Dictionary& dict, const LossSpec& spec, const FiniteDistribution& dist);
/// R(f_theta).
double exact_risk(const SimplexWeights& theta, const Dictionary& dict, const LossSpec& spec,
                  const FiniteDistribution& dist);
/// R(f_theta) for an arbitrary coefficient vector (used by line searches and
/// finite-difference checks that leave the simplex).
double exact_risk_raw(std::span<const double> theta, const Dictionary& dict, const LossSpec& spec,
                      const FiniteDistribution& dist);

/// (R(f_1), ..., R(f_M)).
std::vector<double> vertex_risks(const Dictionary& dict, const LossSpec& spec, const FiniteDistribution& dist);

/// min_j R(f_j); lowest index on ties.
RiskReport ms_oracle(const Dictionary& dict, const LossSpec& spec, const FiniteDistribution& dist);

struct COracleOptions {
  double tolerance = 1e-8;
  std::size_t max_iterations = 1'000'000;
};

/// inf over the convex hull of the dictionary of R(f).
///
/// Pairwise Frank-Wolfe with exact line search, started from the best
/// vertex. Terminates when the Frank-Wolfe gap <grad R(theta), theta> -
/// min_j dR/dtheta_j, which upper-bounds R(f_theta) - R_C for convex losses,
/// drops below the tolerance. Throws ConvergenceError (carrying the best
/// iterate) when the iteration cap is reached first.
RiskReport c_oracle(const Dictionary& dict, const LossSpec& spec, const FiniteDistribution& dist,
                    const COracleOptions& options = {});

/// Exact population gradient of theta -> R(f_theta).
std::vector<double> risk_gradient(std::span<const double> theta, const Dictionary& dict, const LossSpec& spec,
                                  const FiniteDistribution& dist);

/// Frank-Wolfe duality gap at theta.
double frank_wolfe_gap(std::span<const double> theta, std::span<const double> gradient);

/// Reference order of the optimal aggregation rate (natural logarithms):
/// C with M <= sqrt(n): M/n; C with M > sqrt(n): sqrt(ln(M/sqrt(n) + 1) / n);
/// MS: ln(M)/n.
double optimal_rate(std::size_t n, std::size_t m, OracleKind kind);

/// achieved_risk - oracle.risk.
double excess_risk(double achieved_risk, const RiskReport& oracle);

}  // namespace mirror_agg
