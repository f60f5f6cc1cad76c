#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rbm {

/// Invalid caller-supplied argument (CLI exit code 2).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Point outside the chart domain of a model.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Point outside the tubular zone where the normal frame is defined.
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Operation not available for the requested model.
class UnsupportedError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Quadrature or root-finding failure (CLI exit code 3).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Time stepper could not make progress at a node (CLI exit code 3).
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, std::size_t node)
        : std::runtime_error(what + " (node " + std::to_string(node) + ")"), node_(node) {}
    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

/// File read/write failure (CLI exit code 4).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rbm
