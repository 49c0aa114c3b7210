#pragma once

#include <stdexcept>
#include <string>

namespace mmspde {

// Argument outside the mathematical domain of an operation (t <= 0, eta not in (0,1), ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Node grid too coarse to resolve the requested modes.
class AliasingError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Request exceeds what a dense computation can handle (gasket level, fBm grid size).
class ResourceLimitError : public std::length_error {
public:
    using std::length_error::length_error;
};

// Parameter tuple violates the admissibility conditions of the regularity theory.
class AdmissibilityError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// NaN or inf produced while evaluating a nonlinearity at the nodes.
class PropagationError : public std::runtime_error {
public:
    PropagationError(const std::string& what, int node)
        : std::runtime_error(what), node_(node) {}
    int node() const noexcept { return node_; }

private:
    int node_;
};

// Series noise coefficients fail the summability check.
class SummabilityError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace mmspde
