#pragma once

#include <stdexcept>
#include <string>

namespace tubeflow {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A kernel was evaluated at a pole (cotangent at zero, focal radius).
class PoleError : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain of a geometric formula or an inversion.
class RangeError : public Error {
public:
    using Error::Error;
};

class QuadratureError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::string key = {}, int line = 0)
        : Error(what), key_(std::move(key)), line_(line) {}

    const std::string& key() const noexcept { return key_; }
    int line() const noexcept { return line_; }

private:
    std::string key_;
    int line_;
};

} // namespace tubeflow
