#pragma once

#include <stdexcept>
#include <string>

namespace thermiq {

// Base of every error raised by the toolchain.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

// Malformed input text. line() is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& source, int line, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

// The leakage/temperature feedback loop has no fixed point.
class ThermalRunaway : public Error {
public:
    using Error::Error;
};

// Trace files are truncated, misaligned or do not match their metadata.
class IntegrityError : public Error {
public:
    using Error::Error;
};

class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace thermiq
