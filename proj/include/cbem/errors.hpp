#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cbem {

/// Input outside the support of an operation (bad count, empty sample, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Invalid algorithm controls (EMConfig, GridSpec, Scenario).
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// The fit reached a parameter value under which some observation has zero
/// probability, so responsibilities or the log-likelihood are undefined.
class FitDegeneracyError : public std::runtime_error {
public:
  FitDegeneracyError(const std::string &what, std::size_t observation,
                     std::size_t iteration)
      : std::runtime_error(what), observation_(observation),
        iteration_(iteration) {}

  std::size_t observation() const noexcept { return observation_; }
  std::size_t iteration() const noexcept { return iteration_; }

private:
  std::size_t observation_;
  std::size_t iteration_;
};

} // namespace cbem
