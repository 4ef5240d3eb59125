#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace concircle {

/// Root of the library's error hierarchy.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad argument to an operation (index out of range, wrong variance, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Evaluation left the mathematical domain (log of non-positive value,
/// division by zero, singular metric, non-finite intermediate).
/// Carries the offending coordinate point when known.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
    DomainError(const std::string& msg, std::vector<double> point)
        : Error(msg), point_(std::move(point)) {}

    const std::vector<double>& point() const { return point_; }

private:
    std::vector<double> point_;
};

/// A caller violated an interface contract, e.g. requesting a derivative
/// from a jet whose order budget is already exhausted.
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// Syntax error in a DSL expression; offset is the byte position in the
/// source string where the problem was detected.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t offset)
        : Error(msg + " (at byte " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Manifest schema violation. Collects every violation found, not just
/// the first one.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> violations)
        : Error(join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "manifest validation failed:";
        for (const auto& e : v) {
            s += "\n  - " + e;
        }
        return s;
    }
    std::vector<std::string> violations_;
};

/// Filesystem failure while reading or writing reports/manifests.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace concircle
