#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mirror_agg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid tuning parameter (temperature, dictionary size, tolerance, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Malformed data: wrong dimension, non-finite score, bad label.
class InputError : public Error {
 public:
  using Error::Error;
};

// A gradient or second derivative was requested for a loss that has none.
class NotDifferentiableError : public Error {
 public:
  using Error::Error;
};

// Iterative solver hit its cap. Carries the best iterate and its certificate.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best_weights,
                   double best_risk, double certificate)
      : Error(what),
        best_weights_(std::move(best_weights)),
        best_risk_(best_risk),
        certificate_(certificate) {}

  const std::vector<double>& best_weights() const { return best_weights_; }
  double best_risk() const { return best_risk_; }
  double certificate() const { return certificate_; }

 private:
  std::vector<double> best_weights_;
  double best_risk_;
  double certificate_;
};

}  // namespace mirror_agg
