#pragma once

// Independent reference computations used as test oracles. Nothing here calls
// into the library's loss or risk code, so agreement is meaningful.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mirror_agg/oracles.hpp"
#include "mirror_agg/simplex.hpp"

namespace support {

using namespace mirror_agg;

inline double ref_loss(LossKind kind, double y, double f) {
  switch (kind) {
    case LossKind::squared:
      return (y - f) * (y - f);
    case LossKind::phi_exponential:
      return std::exp(-y * f);
    case LossKind::phi_logit2:
      return std::log(1.0 + std::exp(-y * f)) / std::log(2.0);
    case LossKind::phi_hinge:
      return std::max(0.0, 1.0 - y * f);
  }
  return 0.0;
}

struct RawInstance {
  std::vector<std::vector<double>> columns;  // columns[j][x]
  std::vector<Atom> atoms;

  std::size_t m() const { return columns.size(); }
  TabulatedDictionary dictionary() const { return TabulatedDictionary(columns, 1.0); }
  FiniteDistribution distribution() const { return FiniteDistribution(atoms); }

  double value(std::span<const double> theta, std::size_t x) const {
    double v = 0.0;
    for (std::size_t j = 0; j < columns.size(); ++j) v += theta[j] * columns[j][x];
    return v;
  }
  double risk(LossKind kind, std::span<const double> theta) const {
    long double r = 0.0L;
    for (const auto& a : atoms) r += a.probability * ref_loss(kind, a.z.y, value(theta, a.z.x));
    return static_cast<double>(r);
  }
  double vertex_risk(LossKind kind, std::size_t j) const {
    std::vector<double> e(m(), 0.0);
    e[j] = 1.0;
    return risk(kind, e);
  }
};

inline std::vector<double> random_simplex(Rng& rng, std::size_t m) {
  std::vector<double> w(m);
  double total = 0.0;
  for (auto& v : w) {
    v = -std::log(1.0 - uniform01(rng));
    total += v;
  }
  for (auto& v : w) v /= total;
  return w;
}

/// Random instance on `k` design points with dictionary values in [-1, 1].
/// Labels are +-1 for classification losses and in [-1, 1] otherwise.
inline RawInstance random_instance(Rng& rng, std::size_t m, std::size_t k, bool classification) {
  RawInstance inst;
  inst.columns.assign(m, std::vector<double>(k));
  for (auto& col : inst.columns) {
    for (auto& v : col) v = uniform(rng, -1.0, 1.0);
  }
  std::vector<double> p;
  for (std::size_t x = 0; x < k; ++x) {
    if (classification) {
      p.push_back(uniform(rng, 0.05, 1.0));
      inst.atoms.push_back({{x, 1.0}, 0.0});
      p.push_back(uniform(rng, 0.05, 1.0));
      inst.atoms.push_back({{x, -1.0}, 0.0});
    } else {
      const std::size_t labels = 1 + uniform_index(rng, 3);
      for (std::size_t l = 0; l < labels; ++l) {
        p.push_back(uniform(rng, 0.05, 1.0));
        inst.atoms.push_back({{x, uniform(rng, -1.0, 1.0)}, 0.0});
      }
    }
  }
  double total = 0.0;
  for (double v : p) total += v;
  for (std::size_t a = 0; a < p.size(); ++a) inst.atoms[a].probability = p[a] / total;
  return inst;
}

/// Minimum of the risk over the simplex for M in {2, 3} by exhaustive grid
/// search at the given step, followed by repeated local refinement of the
/// grid around the incumbent.
inline double grid_c_oracle(const RawInstance& inst, LossKind kind, double step = 1e-3, int refinements = 4) {
  const std::size_t m = inst.m();
  double best = std::numeric_limits<double>::infinity();
  double best_a = 0.0, best_b = 0.0;
  auto eval = [&](double a, double b) {
    if (a < 0.0 || b < 0.0 || a + b > 1.0 + 1e-15) return;
    std::vector<double> theta;
    if (m == 2) {
      theta = {a, 1.0 - a};
    } else {
      theta = {a, b, std::max(0.0, 1.0 - a - b)};
    }
    const double r = inst.risk(kind, theta);
    if (r < best) {
      best = r;
      best_a = a;
      best_b = b;
    }
  };
  const auto steps = static_cast<long>(std::llround(1.0 / step));
  for (long i = 0; i <= steps; ++i) {
    const double a = static_cast<double>(i) / static_cast<double>(steps);
    if (m == 2) {
      eval(a, 0.0);
    } else {
      for (long j = 0; i + j <= steps; ++j) eval(a, static_cast<double>(j) / static_cast<double>(steps));
    }
  }
  double h = step;
  for (int r = 0; r < refinements; ++r) {
    const double ca = best_a, cb = best_b;
    const double fine = h / 10.0;
    for (int i = -20; i <= 20; ++i) {
      if (m == 2) {
        eval(ca + i * fine, 0.0);
      } else {
        for (int j = -20; j <= 20; ++j) eval(ca + i * fine, cb + j * fine);
      }
    }
    h = fine;
  }
  return best;
}

}  // namespace support
