#pragma once

#include <stdexcept>
#include <string>

namespace redistrict {

/// Malformed or inconsistent input: bad files, broken invariants, unknown ids.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sampler could not produce a plan satisfying its constraints.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace redistrict
