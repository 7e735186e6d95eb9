#pragma once

#include <stdexcept>
#include <string>

namespace dacert {

// Operands or arguments whose shapes do not line up (variable counts,
// orders, vector lengths, index ranges).
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A function evaluated outside its domain (reciprocal of zero, sqrt of a
// non-positive constant part, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Linear part of a map is singular or too badly conditioned to invert.
class SingularMapError : public std::runtime_error {
public:
    SingularMapError(const std::string& what, double condition)
        : std::runtime_error(what), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

// Integration could not continue (step underflow, non-finite state,
// violated physical precondition).
class PropagationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Event refinement or event-map construction failed.
class EventError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid scenario configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Weights file that fails strict validation.
class WeightsError : public ConfigError {
public:
    enum class Kind { missing_field, wrong_type, dimension_mismatch, non_finite, io };

    WeightsError(Kind kind, const std::string& what) : ConfigError(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

} // namespace dacert
