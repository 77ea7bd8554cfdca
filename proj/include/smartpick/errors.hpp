#pragma once

#include <stdexcept>
#include <string>

namespace smartpick {

// Base class for everything thrown on purpose by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input text: config lines, profile files, JSON records, SQL that
// cannot be tokenized into at least one SELECT.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Structurally well-formed input that violates a domain rule (negative
// counts, fleet outside provider bounds, policy/fleet mismatch, ...).
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Operation attempted against an object in the wrong state (predicting with
// an untrained model, planning with an empty registry, ...).
class StateError : public Error {
public:
    explicit StateError(const std::string& msg) : Error(msg) {}
};

// Filesystem / socket failures.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// Numeric arguments outside the mathematical domain of a function
// (non-positive time in a ratio, negative epsilon, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

} // namespace smartpick
