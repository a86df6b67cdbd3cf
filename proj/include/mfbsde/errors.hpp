#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mfbsde {

// Base of every error raised by the library. Callers that only need to
// distinguish "our" failures from std failures can catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Iterated exp/log depth outside the supported range.
class DepthError : public Error {
public:
    using Error::Error;
};

// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
    using Error::Error;
};

// Invalid model parameters (e.g. h <= e^(m), lambda <= 1/2).
class ParameterError : public Error {
public:
    using Error::Error;
};

// Quadrature / root finding failed to converge.
class NumericError : public Error {
public:
    using Error::Error;
};

// Incompatible sizes or dimensions.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Problem too large for an exact routine.
class CapacityError : public Error {
public:
    using Error::Error;
};

// Missing or inconsistent configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

class SearchError : public Error {
public:
    SearchError(const std::string& what, double worst_violation)
        : Error(what), worst_violation_(worst_violation) {}
    double worst_violation() const noexcept { return worst_violation_; }

private:
    double worst_violation_;
};

class RegressionError : public Error {
public:
    RegressionError(const std::string& what, double condition_number)
        : Error(what), condition_number_(condition_number) {}
    double condition_number() const noexcept { return condition_number_; }

private:
    double condition_number_;
};

// Non-finite values produced by the backward scheme. Carries the time node
// and particle that first went bad, plus a human-readable dump.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::size_t node,
                    std::size_t particle, std::string forensic)
        : Error(what), node_(node), particle_(particle),
          forensic_(std::move(forensic)) {}
    std::size_t node() const noexcept { return node_; }
    std::size_t particle() const noexcept { return particle_; }
    const std::string& forensic() const noexcept { return forensic_; }

private:
    std::size_t node_;
    std::size_t particle_;
    std::string forensic_;
};

}  // namespace mfbsde
