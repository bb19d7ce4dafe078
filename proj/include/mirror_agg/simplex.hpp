#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace mirror_agg {

/// Index of a point in a finite design (the support of X).
using DesignPoint = std::size_t;

inline constexpr double kSimplexSumTolerance = 1e-12;

/// A probability vector over the M dictionary elements.
///
/// Every instance is nonnegative, has at least two components and sums to
/// one within kSimplexSumTolerance. Construct through the named factories or
/// renormalize(); there is no way to obtain an unnormalized instance.
class SimplexWeights {
 public:
  static SimplexWeights uniform(std::size_t m);
  static SimplexWeights vertex(std::size_t m, std::size_t j);
  /// Validates an already-normalized vector; throws InputError otherwise.
  static SimplexWeights from_normalized(std::vector<double> weights);

  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t j) const { return w_[j]; }
  std::span<const double> values() const { return w_; }

  friend bool operator==(const SimplexWeights&, const SimplexWeights&) = default;

 private:
  explicit SimplexWeights(std::vector<double> w) : w_(std::move(w)) {}
  friend SimplexWeights renormalize(std::span<const double> raw);
  friend SimplexWeights gibbs_map(std::span<const double> scores, double beta);

  std::vector<double> w_;
};

/// Accumulated scores (one per dictionary element). Finite by construction.
class ScoreVector {
 public:
  explicit ScoreVector(std::size_t m) : s_(m, 0.0) {}
  explicit ScoreVector(std::vector<double> scores);

  std::size_t size() const { return s_.size(); }
  double operator[](std::size_t j) const { return s_[j]; }
  std::span<const double> values() const { return s_; }

  /// this += scale * direction. Throws InputError if the result is not finite.
  void add_scaled(std::span<const double> direction, double scale);

  friend bool operator==(const ScoreVector&, const ScoreVector&) = default;

 private:
  std::vector<double> s_;
};

/// The M base functions f_1..f_M on a finite design.
class Dictionary {
 public:
  virtual ~Dictionary() = default;

  virtual std::size_t size() const = 0;
  /// Number of design points the dictionary is defined on.
  virtual std::size_t design_size() const = 0;
  /// Uniform bound B with |f_j(x)| <= B.
  virtual double range_bound() const = 0;
  virtual double evaluate(std::size_t j, DesignPoint x) const = 0;

  /// Writes (f_1(x), ..., f_M(x)) into out.
  virtual void evaluate_all(DesignPoint x, std::span<double> out) const;
};

/// Dictionary stored as a design_size x M table.
class TabulatedDictionary final : public Dictionary {
 public:
  /// columns[j][x] = f_j(x). All columns must have equal length and satisfy
  /// |value| <= range_bound.
  TabulatedDictionary(const std::vector<std::vector<double>>& columns, double range_bound);

  std::size_t size() const override { return m_; }
  std::size_t design_size() const override { return k_; }
  double range_bound() const override { return bound_; }
  double evaluate(std::size_t j, DesignPoint x) const override { return table_[x * m_ + j]; }
  void evaluate_all(DesignPoint x, std::span<double> out) const override;

  /// Row view (f_1(x), ..., f_M(x)).
  std::span<const double> row(DesignPoint x) const { return {table_.data() + x * m_, m_}; }

 private:
  std::size_t m_;
  std::size_t k_;
  double bound_;
  std::vector<double> table_;
};

/// Dictionary backed by a callable. In debug builds every evaluation is
/// checked against the declared range bound.
class FunctionDictionary final : public Dictionary {
 public:
  using Fn = std::function<double(std::size_t j, DesignPoint x)>;

  FunctionDictionary(std::size_t m, std::size_t design_size, double range_bound, Fn fn);

  std::size_t size() const override { return m_; }
  std::size_t design_size() const override { return k_; }
  double range_bound() const override { return bound_; }
  double evaluate(std::size_t j, DesignPoint x) const override;

 private:
  std::size_t m_;
  std::size_t k_;
  double bound_;
  Fn fn_;
};

/// Softmin of scores at temperature beta: w_j = exp(-s_j/beta) / sum_k exp(-s_k/beta).
///
/// Scores are shifted by their minimum before exponentiating, so the result
/// is exact under constant shifts and never overflows for finite input.
/// Throws ParameterError for beta <= 0 (or non-finite), InputError for a
/// non-finite score.
SimplexWeights gibbs_map(std::span<const double> scores, double beta);
inline SimplexWeights gibbs_map(const ScoreVector& scores, double beta) {
  return gibbs_map(scores.values(), beta);
}

/// Divides a nonnegative vector by its sum.
SimplexWeights renormalize(std::span<const double> raw);

/// sum_j theta_j f_j(x).
double mixture_value(const SimplexWeights& theta, const Dictionary& dict, DesignPoint x);

/// sum_j theta_j values_j for an arbitrary (not necessarily simplex) theta.
double dot(std::span<const double> theta, std::span<const double> values);

}  // namespace mirror_agg
