#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lensrig {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// Evaluation outside an expression's real domain (log of a non-positive value, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

class GeometryError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public Error {
public:
    using Error::Error;
};

// Geodesic did not reach the boundary before t_max.
class TrappedError : public Error {
public:
    explicit TrappedError(double t_max)
        : Error("geodesic trapped: no boundary exit before t_max = " + std::to_string(t_max)),
          t_max_(t_max) {}
    double t_max() const noexcept { return t_max_; }

private:
    double t_max_;
};

// Even-order (tangential) contact with the boundary.
class GrazingError : public Error {
public:
    GrazingError(const std::string& what, double t, int order)
        : Error(what), t_(t), order_(order) {}
    double t() const noexcept { return t_; }
    int contact_order() const noexcept { return order_; }

private:
    double t_;
    int order_;
};

class NoConvergenceError : public Error {
public:
    using Error::Error;
};

class OutOfCollarError : public Error {
public:
    using Error::Error;
};

class LensMismatchError : public Error {
public:
    using Error::Error;
};

class DegenerateError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& path, const std::string& what)
        : Error(path.empty() ? what : path + ": " + what), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace lensrig
