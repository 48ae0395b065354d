#pragma once

#include <stdexcept>
#include <string>

namespace cumac {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid parameters, malformed configuration, unsupported combinations.
// The CLI maps these to its "configuration error" exit code.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

// A packet counter moved backwards or repeated.
class ReplayError : public Error {
public:
    explicit ReplayError(const std::string& what) : Error(what) {}
};

// Lookup of a counter the receiver has never seen.
class NotFoundError : public Error {
public:
    explicit NotFoundError(const std::string& what) : Error(what) {}
};

// Malformed serialized data (wire frames, CSV traces, hex strings).
class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error(what) {}
};

}  // namespace cumac
