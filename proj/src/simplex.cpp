#include "mirror_agg/simplex.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include "mirror_agg/errors.hpp"

namespace mirror_agg {

namespace {

void require_dimension(std::size_t m) {
  if (m < 2) throw InputError("simplex dimension must be at least 2, got " + std::to_string(m));
}

}  // namespace

SimplexWeights SimplexWeights::uniform(std::size_t m) {
  require_dimension(m);
  return SimplexWeights(std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

SimplexWeights SimplexWeights::vertex(std::size_t m, std::size_t j) {
  require_dimension(m);
  if (j >= m) throw InputError("vertex index out of range");
  std::vector<double> w(m, 0.0);
  w[j] = 1.0;
  return SimplexWeights(std::move(w));
}

SimplexWeights SimplexWeights::from_normalized(std::vector<double> weights) {
  require_dimension(weights.size());
  double total = 0.0;
  for (double v : weights) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("simplex weights must be finite and nonnegative");
    total += v;
  }
  if (std::abs(total - 1.0) > kSimplexSumTolerance) {
    throw InputError("simplex weights sum to " + std::to_string(total) + ", expected 1");
  }
  return SimplexWeights(std::move(weights));
}

ScoreVector::ScoreVector(std::vector<double> scores) : s_(std::move(scores)) {
  for (double v : s_) {
    if (!std::isfinite(v)) throw InputError("score vector has a non-finite component");
  }
}

void ScoreVector::add_scaled(std::span<const double> direction, double scale) {
  if (direction.size() != s_.size()) throw InputError("score update has wrong dimension");
  for (std::size_t j = 0; j < s_.size(); ++j) {
    s_[j] += scale * direction[j];
    if (!std::isfinite(s_[j])) throw InputError("score vector became non-finite");
  }
}

void Dictionary::evaluate_all(DesignPoint x, std::span<double> out) const {
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = evaluate(j, x);
}

TabulatedDictionary::TabulatedDictionary(const std::vector<std::vector<double>>& columns,
                                         double range_bound)
    : m_(columns.size()), k_(columns.empty() ? 0 : columns.front().size()), bound_(range_bound) {
  if (m_ == 0 || k_ == 0) throw InputError("dictionary must have at least one function and one design point");
  if (!(range_bound >= 0.0) || !std::isfinite(range_bound)) throw ParameterError("range bound must be finite and >= 0");
  table_.resize(m_ * k_);
  for (std::size_t j = 0; j < m_; ++j) {
    if (columns[j].size() != k_) throw InputError("dictionary columns have unequal length");
    for (std::size_t x = 0; x < k_; ++x) {
      const double v = columns[j][x];
      if (!std::isfinite(v) || std::abs(v) > bound_) {
        throw InputError("dictionary value f_" + std::to_string(j) + "(" + std::to_string(x) +
                         ") = " + std::to_string(v) + " exceeds range bound");
      }
      table_[x * m_ + j] = v;
    }
  }
}

void TabulatedDictionary::evaluate_all(DesignPoint x, std::span<double> out) const {
  const auto r = row(x);
  std::copy(r.begin(), r.end(), out.begin());
}

FunctionDictionary::FunctionDictionary(std::size_t m, std::size_t design_size, double range_bound, Fn fn)
    : m_(m), k_(design_size), bound_(range_bound), fn_(std::move(fn)) {
  if (m_ == 0 || k_ == 0) throw InputError("dictionary must have at least one function and one design point");
  if (!(range_bound >= 0.0)) throw ParameterError("range bound must be >= 0");
}

double FunctionDictionary::evaluate(std::size_t j, DesignPoint x) const {
  const double v = fn_(j, x);
#ifndef NDEBUG
  if (std::abs(v) > bound_) throw InputError("dictionary evaluation exceeds range bound");
#endif
  return v;
}

SimplexWeights gibbs_map(std::span<const double> scores, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ParameterError("Gibbs temperature must be positive and finite");
  require_dimension(scores.size());
  double lowest = scores[0];
  for (double s : scores) {
    if (!std::isfinite(s)) throw InputError("Gibbs map input has a non-finite score");
    lowest = std::min(lowest, s);
  }
  // Differences are taken before dividing by beta: the minimum maps to
  // exp(0) = 1 exactly, so the normalizer is >= 1.
  std::vector<double> w(scores.size());
  double total = 0.0;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    w[j] = std::exp(-(scores[j] - lowest) / beta);
    total += w[j];
  }
  for (double& v : w) v /= total;
  return SimplexWeights(std::move(w));
}

SimplexWeights renormalize(std::span<const double> raw) {
  require_dimension(raw.size());
  double total = 0.0;
  for (double v : raw) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("cannot renormalize: negative or non-finite component");
    total += v;
  }
  if (!(total > 0.0)) throw InputError("cannot renormalize: components sum to zero");
  std::vector<double> w(raw.begin(), raw.end());
  for (double& v : w) v /= total;
  return SimplexWeights(std::move(w));
}

double dot(std::span<const double> theta, std::span<const double> values) {
  assert(theta.size() == values.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) acc += theta[j] * values[j];
  return acc;
}

double mixture_value(const SimplexWeights& theta, const Dictionary& dict, DesignPoint x) {
  if (theta.size() != dict.size()) throw InputError("weights and dictionary differ in dimension");
  double acc = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    if (theta[j] != 0.0) acc += theta[j] * dict.evaluate(j, x);
  }
  return acc;
}

}  // namespace mirror_agg
