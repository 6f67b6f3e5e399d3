#pragma once

#include <stdexcept>
#include <string>

namespace relight {

// Error categories map one-to-one onto the C API status codes.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller bug: mismatched dimensions, bad enum value, argument out of range.
class InvalidArgumentError : public Error {
public:
    using Error::Error;
};

// File system failures: missing file, unreadable path, write failure.
class IoError : public Error {
public:
    using Error::Error;
};

// Recognized file that cannot be decoded: corrupt header, truncated data.
class FormatError : public Error {
public:
    using Error::Error;
};

// File whose magic bytes match no format this library reads.
class UnsupportedFormatError : public FormatError {
public:
    using FormatError::FormatError;
};

// Invalid configuration document or field value.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Non-finite value produced where the contract requires finiteness.
class NumericError : public Error {
public:
    NumericError(const std::string& msg, int stage) : Error(msg), stage_(stage) {}
    explicit NumericError(const std::string& msg) : Error(msg), stage_(-1) {}
    int stage() const { return stage_; }

private:
    int stage_;
};

} // namespace relight
