#pragma once

#include <stdexcept>
#include <string>

namespace szego {

// Raised for malformed inputs (bad tolerances, empty grids, invalid orders).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A requested derivative order or evaluator is not available.
class CapabilityError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Base class for failures of the numerical machinery.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IntegrandError : public NumericalError {
public:
    IntegrandError(const std::string& what, double location)
        : NumericalError(what), location_(location) {}
    double location() const { return location_; }

private:
    double location_;
};

class IntegralFailure : public NumericalError {
public:
    IntegralFailure(const std::string& what, double error_estimate, long evaluations)
        : NumericalError(what), error_estimate_(error_estimate), evaluations_(evaluations) {}
    double error_estimate() const { return error_estimate_; }
    long evaluations() const { return evaluations_; }

private:
    double error_estimate_;
    long evaluations_;
};

class DivergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class UnboundedBelow : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InfiniteWidth : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DomainError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularSystem : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace szego
