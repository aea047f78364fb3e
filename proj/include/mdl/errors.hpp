#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace mdl {

/// Argument lies outside the region where the requested evaluation is defined
/// (suffix-sum condition violated, or a sequence without a certified
/// partial-sum bound was passed to a conditionally convergent evaluator).
class region_error : public std::domain_error {
public:
  explicit region_error(const std::string& what) : std::domain_error(what) {}
};

/// The requested tolerance cannot be met within the configured cost ceiling.
/// Carries the best value achieved and its error estimate.
class budget_error : public std::runtime_error {
public:
  budget_error(const std::string& what, std::complex<double> best_value,
               double best_estimate)
      : std::runtime_error(what), value(best_value), estimate(best_estimate) {}

  std::complex<double> value;
  double estimate;
};

/// Rank (or feature combination) the implementation does not support.
class unsupported_error : public std::runtime_error {
public:
  explicit unsupported_error(const std::string& what)
      : std::runtime_error(what) {}
};

} // namespace mdl
