#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mmoe {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mismatched label-set sizes (ragged distributions, wrong |Y|).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A record or value violates a documented invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& message)
        : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_ = 0;
};

/// Bad configuration (CLI flags, routing tables, thresholds).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Non-finite values or out-of-domain numeric arguments.
class NumericError : public Error {
public:
    using Error::Error;
};

/// A single expert request failed at the transport level; retryable.
class TransportError : public Error {
public:
    using Error::Error;
};

/// Dispatch gave up after exhausting retries.
class RoutingError : public Error {
public:
    using Error::Error;
};

/// The expert answered, but not in the wire format; keeps the raw body.
class ProtocolError : public Error {
public:
    ProtocolError(const std::string& message, std::string raw_body)
        : Error(message), raw_body_(std::move(raw_body)) {}

    const std::string& raw_body() const { return raw_body_; }

private:
    std::string raw_body_;
};

/// A planted-dataset spec cannot be satisfied.
class GenerationError : public Error {
public:
    using Error::Error;
};

}  // namespace mmoe
