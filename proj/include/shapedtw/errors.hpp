#pragma once

#include <stdexcept>
#include <string>

namespace shapedtw {

/// Bad input data: malformed files, out-of-range parameters, empty signals.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// A structural invariant was violated (a bug, not bad input).
class InvariantError : public std::logic_error {
 public:
  explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace shapedtw
