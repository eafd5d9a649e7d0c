#pragma once

#include <stdexcept>
#include <string>

namespace ringdist {

// Malformed or inconsistent input data (CSV rows, incompatible tables).
// `line` is 1-based when the error comes from a parsed file, -1 otherwise.
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& msg, int line = -1)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

// Result failed a numerical self-check (non-finite update, inconsistent
// inversion). Distinct from domain errors so callers can map it separately.
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Requested table would exceed the supported variable count.
class capacity_error : public std::length_error {
public:
    using std::length_error::length_error;
};

}  // namespace ringdist
