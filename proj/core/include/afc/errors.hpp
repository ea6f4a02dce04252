#pragma once

#include <stdexcept>
#include <string>

namespace afc {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Inconsistent or incomplete experiment configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// A measurement-style analysis could not be carried out on the input.
class AnalysisError : public Error {
public:
  using Error::Error;
};

/// The rate-equation integrator produced an unphysical state.
class IntegrationError : public Error {
public:
  using Error::Error;
};

/// A least-squares or minimisation problem failed to converge.
class FitError : public Error {
public:
  using Error::Error;
};

}  // namespace afc
