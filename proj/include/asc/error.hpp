#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace asc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shape or length disagreement between operands.
class DimensionError : public Error {
public:
    using Error::Error;
};

// A value violates a documented precondition or invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Text input (CSV, dataset, plan JSON) could not be parsed. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Model container validation failures. Each kind is reported distinctly so callers and tests
// can tell a truncated file from a schema problem.
class FormatError : public Error {
public:
    enum class Kind {
        bad_magic,
        truncated,
        malformed_header,
        unknown_version,
        invalid_config,
        missing_tensor,
        unexpected_tensor,
        shape_mismatch,
        bad_offset,
        non_finite,
    };

    FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

} // namespace asc
