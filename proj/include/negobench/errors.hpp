#pragma once

#include <stdexcept>
#include <string>

namespace negobench {

// Structural problems: bad configs, malformed files, dimension mismatches.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// The request is well-formed but exceeds a solver/enumeration limit.
struct TractabilityError : std::runtime_error {
  explicit TractabilityError(const std::string& what) : std::runtime_error(what) {}
};

// Remote endpoint failures that survived the retry policy.
struct ExternalServiceError : std::runtime_error {
  explicit ExternalServiceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace negobench
