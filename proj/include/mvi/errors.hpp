#pragma once

#include <stdexcept>
#include <string>

namespace mvi {

// Bad players, malformed sets, i == j, empty coalitions.
struct DomainError : std::invalid_argument {
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed files, bad table lengths, unknown ops, arity violations.
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Request exceeds an enumeration cap.
struct CapacityError : std::runtime_error {
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

// Numerically meaningless request (zero-norm feature, all-zero instability).
struct DegenerateError : std::runtime_error {
  explicit DegenerateError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mvi
