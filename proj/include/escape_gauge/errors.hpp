#pragma once

#include <stdexcept>
#include <string>

namespace escape_gauge {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Evaluation point too close to a pole of the truncated series.
class PoleProximity : public std::runtime_error {
public:
    explicit PoleProximity(const std::string& what) : std::runtime_error(what) {}
};

// |z| is beyond the radius where the truncated tail bound is valid.
class TruncationUnsafe : public std::runtime_error {
public:
    explicit TruncationUnsafe(const std::string& what) : std::runtime_error(what) {}
};

class NoConvergence : public std::runtime_error {
public:
    explicit NoConvergence(const std::string& what) : std::runtime_error(what) {}
};

class InsufficientRange : public std::runtime_error {
public:
    explicit InsufficientRange(const std::string& what) : std::runtime_error(what) {}
};

} // namespace escape_gauge
