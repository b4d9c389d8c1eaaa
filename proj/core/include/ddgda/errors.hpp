#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ddgda {

/// Dimension mismatch, out-of-domain parameter, or malformed input.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A NaN or infinity showed up where finite values are required.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Ratio l/mu requested for a profile with mu = 0.
class UndefinedConditionNumber : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Stepsize rule requested for a profile of the wrong concavity class.
class InvalidClass : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Normal-equation solve failed even with the ridge term added.
class SingularityError : public std::runtime_error {
public:
  SingularityError(const std::string &what, double condition_estimate)
      : std::runtime_error(what), condition_estimate_(condition_estimate) {}

  double condition_estimate() const noexcept { return condition_estimate_; }

private:
  double condition_estimate_;
};

/// An inner solver hit its iteration cap before reaching the tolerance.
class SolverFailure : public std::runtime_error {
public:
  SolverFailure(const std::string &what, int iterations, double residual)
      : std::runtime_error(what), iterations_(iterations), residual_(residual) {}

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

private:
  int iterations_;
  double residual_;
};

/// Wraps a failure raised inside a solver loop with the iteration index.
class IterationError : public std::runtime_error {
public:
  IterationError(const std::string &what, std::size_t iteration)
      : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

private:
  std::size_t iteration_;
};

} // namespace ddgda
