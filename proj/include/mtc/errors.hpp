#pragma once

#include <stdexcept>
#include <string>

namespace mtc {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad CLI flags, bad run config, missing credentials.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Missing or unreadable files, malformed records. `line` is 1-based,
// 0 when the error is not tied to a specific line.
class FileFormatError : public Error {
public:
    FileFormatError(const std::string& msg, std::size_t line = 0)
        : Error(line ? msg + " (line " + std::to_string(line) + ")" : msg), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class BackendError : public Error {
public:
    using Error::Error;
};

// Network-level failure; retryable.
class TransportError : public BackendError {
public:
    using BackendError::BackendError;
};

// HTTP 429 or provider throttle; retry with backoff.
class RateLimitedError : public BackendError {
public:
    using BackendError::BackendError;
};

// Response arrived but does not match the expected wire shape.
class MalformedPayloadError : public BackendError {
public:
    using BackendError::BackendError;
};

class LogprobsUnavailableError : public Error {
public:
    using Error::Error;
};

// Marker phrase exists in the reply text but cannot be aligned to tokens.
class AnswerSpanError : public Error {
public:
    using Error::Error;
};

// Confidence scores do not line up one-to-one with assistant turns.
class AlignmentError : public Error {
public:
    using Error::Error;
};

// Zero variance, single class, too few samples and friends.
class DegenerateSampleError : public Error {
public:
    using Error::Error;
};

// A cross-table consistency check failed at report-emission time.
class InvariantViolationError : public Error {
public:
    using Error::Error;
};

}  // namespace mtc
