#pragma once

#include <stdexcept>
#include <string>

namespace mcwlan {

/// A model or configuration value lies outside its legal range.
class RangeError : public std::invalid_argument {
 public:
  RangeError(std::string field, const std::string& what)
      : std::invalid_argument(what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// The mean-field fixed point was not reached within the iteration cap.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(int iterations, double last_residual);

  int iterations() const noexcept { return iterations_; }
  double last_residual() const noexcept { return last_residual_; }

 private:
  int iterations_;
  double last_residual_;
};

class NumericalIntegrationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A required-SNR target is not reachable inside the search bracket.
class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent simulation or experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mcwlan
