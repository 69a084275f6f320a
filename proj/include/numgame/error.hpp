#pragma once

#include <stdexcept>
#include <string>

namespace numgame {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An instance or parameter outside the domain an operation is defined on.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Operation invoked on a posterior in the empty (fully falsified) state.
class StateError : public Error {
public:
  using Error::Error;
};

/// The proposal backend could not be reached after all retries.
class BackendUnavailable : public Error {
public:
  using Error::Error;
};

/// Invalid configuration or command-line usage.
class UsageError : public Error {
public:
  using Error::Error;
};

/// Conflicting input to an aggregation (e.g. two records for one grid cell).
class AggregationError : public Error {
public:
  using Error::Error;
};

} // namespace numgame
