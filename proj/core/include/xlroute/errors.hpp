#pragma once

#include <stdexcept>
#include <string>

namespace xlr {

// Base class for every error thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad scenario, topology or hyperparameter values.
struct ConfigError : Error {
  using Error::Error;
};

// Invalid node geometry, e.g. a zero-length active link.
struct GeometryError : Error {
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

// Traffic is present but the serving rate is zero.
struct StarvationError : Error {
  using Error::Error;
};

// Queue arrival rate at or above the service rate.
struct InstabilityError : Error {
  using Error::Error;
};

// Operation applied to a node lacking the required links.
struct StructureError : Error {
  using Error::Error;
};

// Exhaustive enumeration would exceed the configured cap.
struct EnumerationCapError : Error {
  using Error::Error;
};

// Scenario / sweep-spec file syntax error with source location.
struct ParseError : Error {
  ParseError(std::string file_, int line_, const std::string& msg)
      : Error(file_ + ":" + std::to_string(line_) + ": " + msg),
        file(std::move(file_)),
        line(line_) {}
  std::string file;
  int line;
};

}  // namespace xlr
