#pragma once

#include <stdexcept>
#include <string>

namespace hfrac {

/// Raised when a caller violates an operation's precondition (bad parameters,
/// mismatched lattices, inadmissible exponents). The message names the
/// violated constraint.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw UsageError(message);
}

}  // namespace hfrac
