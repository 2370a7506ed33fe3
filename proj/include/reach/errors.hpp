#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace reach {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Syntax error while parsing an expression. Carries the byte offset into
/// the source text and the set of tokens that would have been accepted.
struct ParseError : Error {
    ParseError(const std::string& what, std::size_t offset, std::vector<std::string> expected_tokens)
        : Error(what), offset(offset), expected(std::move(expected_tokens)) {}

    std::size_t offset;
    std::vector<std::string> expected;
};

/// Runtime evaluation failure: unbound variable, log of a non-positive
/// number, division by zero, non-finite result.
struct EvalError : Error {
    using Error::Error;
};

/// An interval operation left the domain of the function being evaluated
/// (e.g. log over an interval containing zero).
struct DomainError : Error {
    using Error::Error;
};

/// Model file or model construction problem.
struct ModelError : Error {
    using Error::Error;
};

/// Dimension mismatch or ill-conditioned input in a linear-algebra kernel.
struct LinalgError : Error {
    using Error::Error;
};

/// Simulation blow-up: a non-finite state was produced.
struct SimError : Error {
    SimError(const std::string& what, double t) : Error(what), time(t) {}
    double time;
};

}  // namespace reach
