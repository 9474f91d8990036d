#pragma once

#include <stdexcept>
#include <string>

namespace jbf {

// Bad descriptor / expression syntax / malformed request.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Evaluation left the real domain (log of non-positive, division by zero,
// singular locus of a formula).
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// A stated precondition does not hold (system not linearly degenerate,
// degenerate metric, no characteristic bracket).
struct PreconditionError : std::runtime_error {
  explicit PreconditionError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace jbf
