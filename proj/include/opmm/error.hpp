#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace opmm {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Duplicate or unknown model id.
class RegistryError : public Error {
public:
    using Error::Error;
};

// Parameter vector outside the model's physical region.
class DomainError : public Error {
public:
    using Error::Error;
};

// Non-finite plant state during integration.
class DivergenceError : public Error {
public:
    DivergenceError(std::size_t step, const std::string& what)
        : Error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

// Invalid caller-supplied data (too few samples, bad threshold, ...).
class InputError : public Error {
public:
    using Error::Error;
};

// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

// Malformed recording file. line() is 1-based and counts the header.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Well-formed rows that break a recording invariant (timestamps, sampling).
class FormatError : public Error {
public:
    using Error::Error;
};

// Serial re-check disagrees with the optimizer's reported error.
class ValidationError : public Error {
public:
    ValidationError(int saccade_id, const std::string& what)
        : Error(what), saccade_id_(saccade_id) {}
    int saccade_id() const noexcept { return saccade_id_; }

private:
    int saccade_id_;
};

// Results from different models written to one table.
class SchemaError : public Error {
public:
    using Error::Error;
};

}  // namespace opmm
