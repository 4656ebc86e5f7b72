#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace gpav {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Shifted energy E[phi] came out non-positive; c0 is too small for this field.
class NonPositiveEnergy : public Error {
public:
    explicit NonPositiveEnergy(double energy)
        : Error("energy " + std::to_string(energy) + " is not positive; increase c0"), energy_(energy)
    {
    }
    [[nodiscard]] double energy() const noexcept { return energy_; }

private:
    double energy_;
};

class InvalidState : public Error {
public:
    using Error::Error;
};

/// A stepper produced non-finite values or exceeded the overflow guard.
class Diverged : public Error {
public:
    Diverged(long step, const std::string& what) : Error(what), step_(step) {}
    [[nodiscard]] long step() const noexcept { return step_; }

private:
    long step_;
};

class GridTooCoarse : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

/// Configuration constraint violated. field() names the offending key, e.g. "time.dt".
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field))
    {
    }
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace gpav
