#pragma once

#include <stdexcept>
#include <string>

namespace mhekit {

// Raised when a linear system's eigenvector basis is too ill-conditioned to
// trust the diagonalization (cond > 1e12).
class NotDiagonalizable : public std::runtime_error {
 public:
  explicit NotDiagonalizable(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a certificate is requested for a system with spectral radius >= 1.
class Unstable : public std::runtime_error {
 public:
  explicit Unstable(const std::string& what) : std::runtime_error(what) {}
};

// Raised when two comparison-function objects from different decay families
// are combined where a single family is required.
class MixedFamilies : public std::runtime_error {
 public:
  explicit MixedFamilies(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a cost has no usable lower envelope (lambda == 1 removes the
// max terms entirely). Callers may still evaluate the cost; they just cannot
// certify stability with it.
class DegenerateLowerBound : public std::runtime_error {
 public:
  explicit DegenerateLowerBound(const std::string& what) : std::runtime_error(what) {}
};

// Raised for malformed run configurations (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mhekit
