#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shelab {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed coefficient source text. `offset` is the byte offset of the
// offending token.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// A precondition on an argument was violated (r <= 0, empty grid, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// A function evaluation produced a non-finite value.
class EvaluationError : public Error {
public:
    using Error::Error;
};

// The explicit scheme produced a non-finite value at lattice point (m, j).
class NonFiniteError : public Error {
public:
    NonFiniteError(std::size_t m, std::size_t j)
        : Error("non-finite value at time index " + std::to_string(m) +
                ", space index " + std::to_string(j)),
          m_(m), j_(j) {}

    std::size_t time_index() const noexcept { return m_; }
    std::size_t space_index() const noexcept { return j_; }

private:
    std::size_t m_;
    std::size_t j_;
};

// Two trajectories that should share noise do not.
class CouplingError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// An experiment-level assertion did not hold.
class ExperimentFailure : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace shelab
