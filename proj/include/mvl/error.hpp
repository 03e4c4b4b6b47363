#pragma once

#include <stdexcept>
#include <string>

namespace mvl {

// Thrown on malformed arguments: shape mismatches, empty inputs, bad ranges.
struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when an input is structurally valid but makes a formula undefined
// (all-same labels, constant kernels, zero-variance samples, zero weights).
struct DegenerateInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when an iterative solver exhausts its iteration budget.
struct ConvergenceFailure : std::runtime_error {
    ConvergenceFailure(const std::string& what, double residual)
        : std::runtime_error(what), residual(residual) {}
    double residual;
};

struct SingularMatrix : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown by file loaders; message carries file and line where known.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Use of an unfitted model or other API misuse.
struct StateError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace mvl
