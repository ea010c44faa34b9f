#pragma once

#include <stdexcept>
#include <string>

namespace sdiv {

/// Base class for all simulator errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Unknown node / vehicle / camera id.
class LookupError : public Error {
public:
    explicit LookupError(const std::string& msg) : Error(msg) {}
};

/// Malformed input file; message carries the line number.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

/// Structurally valid input that violates a scenario invariant.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

/// Zero heading vector passed where a direction is required.
class InvalidDirectionError : public Error {
public:
    explicit InvalidDirectionError(const std::string& msg) : Error(msg) {}
};

/// Path prediction failure; the caller decides the fallback.
class PathError : public Error {
public:
    enum class Kind { NoForwardChild, PathNotFound };

    PathError(Kind kind, const std::string& msg) : Error(msg), kind_(kind) {}
    Kind kind() const { return kind_; }

    const char* kind_name() const {
        return kind_ == Kind::NoForwardChild ? "NoForwardChild" : "PathNotFound";
    }

private:
    Kind kind_;
};

}  // namespace sdiv
