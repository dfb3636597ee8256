#pragma once

#include <stdexcept>
#include <string>

namespace cordon {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input records (claim cards, corpus lines, config files).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(what) {}
};

class SerializeError : public Error {
public:
    explicit SerializeError(const std::string& what) : Error(what) {}
};

// Bad arguments to an operation (empty text, out-of-range counts).
class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

// Backend unreachable after retries.
class BackendError : public Error {
public:
    explicit BackendError(const std::string& what) : Error(what) {}
};

// Backend reachable but returned a non-success status.
class ProtocolError : public Error {
public:
    ProtocolError(int status, const std::string& what)
        : Error(what), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

// A pipeline stage failed; carries stage attribution and whether the
// underlying cause was backend unavailability.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what, bool backend_failure = false)
        : Error(stage + ": " + what), stage_(std::move(stage)), backend_failure_(backend_failure) {}
    const std::string& stage() const { return stage_; }
    bool backend_failure() const { return backend_failure_; }

private:
    std::string stage_;
    bool backend_failure_;
};

}  // namespace cordon
