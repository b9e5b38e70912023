#pragma once

#include <stdexcept>
#include <string>

namespace rct {

// Shape/dimension mismatch between arguments.
struct ShapeError : std::invalid_argument {
    explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

// Argument outside its mathematical domain (negative weight, bad rate, ...).
struct DomainError : std::invalid_argument {
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// A documented precondition of an operation was violated by the caller.
struct ContractViolation : std::invalid_argument {
    explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

// Problem size exceeds a configured resource cap.
struct ResourceError : std::runtime_error {
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

// The contraction premise needed for a fixed-point argument does not hold.
struct NonContractionError : std::runtime_error {
    explicit NonContractionError(const std::string& what) : std::runtime_error(what) {}
};

// An iteration failed to converge or produced non-finite values.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace rct
