#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace wgeom {

/// Base of every error raised by the library; carries the originating module.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& message)
        : std::runtime_error(module + ": " + message), module_(std::move(module)) {}
    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t offset)
        : Error("manifold", message + " at byte " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

std::string format_point(const std::vector<double>& x);

class EvalDomainError : public Error {
public:
    EvalDomainError(const std::string& message, std::vector<double> point)
        : Error("manifold", message + " at " + format_point(point)), point_(std::move(point)) {}
    const std::vector<double>& point() const noexcept { return point_; }

private:
    std::vector<double> point_;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class SingularMetricError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    SchemaError(std::string path, const std::string& message)
        : Error("cli", path + ": " + message), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

} // namespace wgeom
