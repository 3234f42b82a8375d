#pragma once

#include <stdexcept>
#include <string>

namespace vtsize {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A caller violated an operation precondition (bad shape, empty input, out-of-range parameter).
class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& msg) : Error(msg) {}
};

/// A measurement cannot be taken from the given data (missing keypoint, empty region).
class MeasurementError : public Error {
public:
    explicit MeasurementError(const std::string& msg) : Error(msg) {}
};

/// An external service failed (unreachable, timeout, HTTP error).
class BackendError : public Error {
public:
    explicit BackendError(const std::string& msg) : Error(msg) {}
};

/// An external service answered, but the payload violates the wire contract.
class ProtocolError : public Error {
public:
    explicit ProtocolError(const std::string& msg) : Error(msg) {}
};

/// Bad or inconsistent run configuration (missing files, unknown labels, bad ranges).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

} // namespace vtsize
