#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace invar {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised by parse_expression; position is the 1-based character position of
// the offending token (one past the end of input for premature EOF).
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t position)
      : Error(what), position(position) {}
  std::size_t position;
};

// Raised when evaluation leaves the domain of an operation (log of a
// non-positive value, division by zero, non-finite result, ...).
struct EvalError : Error {
  using Error::Error;
};

struct DimensionError : Error {
  using Error::Error;
};

// Polygon construction asked to start outside the set.
struct InvalidStartError : Error {
  using Error::Error;
};

// Okamura distance query whose target is not reachable by any chain.
struct UnreachableError : Error {
  using Error::Error;
};

// Comparison check whose scalar premise fails; the conclusion is untested.
struct PremiseFailedError : Error {
  using Error::Error;
};

struct NotFoundError : Error {
  using Error::Error;
};

struct ScenarioError : Error {
  ScenarioError(const std::string& what, int line) : Error(what), line(line) {}
  int line;
};

}  // namespace invar
