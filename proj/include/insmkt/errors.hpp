#pragma once

#include <stdexcept>
#include <string>

namespace insmkt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parameters or configuration violate a documented precondition.
class InvalidParameters : public Error {
public:
    using Error::Error;
};

/// g1^2 - g2^2 vanishes: the market-clearing system cannot be inverted.
class DegenerateSystem : public Error {
public:
    using Error::Error;
};

class NegativeReserves : public Error {
public:
    using Error::Error;
};

/// Sigma^2 = 0: underwriting and investment vanish simultaneously.
class VanishingDiffusion : public Error {
public:
    using Error::Error;
};

/// The solver could not produce an equilibrium that satisfies the model
/// assumptions. `invariant()` names the condition that failed.
class NoEquilibrium : public Error {
public:
    NoEquilibrium(std::string invariant, const std::string& what)
        : Error(what), invariant_(std::move(invariant)) {}

    const std::string& invariant() const noexcept { return invariant_; }

private:
    std::string invariant_;
};

/// The shooting objective has no sign change on the search interval, so no
/// payout barrier with u = 1 can be reached.
class NoBracket : public NoEquilibrium {
public:
    using NoEquilibrium::NoEquilibrium;
};

class InvalidSolution : public Error {
public:
    using Error::Error;
};

class SingularSystem : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace insmkt
