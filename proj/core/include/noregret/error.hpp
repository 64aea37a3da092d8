#pragma once

#include <stdexcept>
#include <string>

namespace noregret {

// Malformed or out-of-range configuration (unknown kinds, bad step sizes,
// invalid experiment specs).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A call violated an operation precondition (dimension mismatch, index out of
// range, empty input).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Not enough usable data points for a statistical fit or solve.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The requested quantity is undefined for this reward process.
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A bounded randomized search ran out of attempts.
class SearchFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace noregret
