#ifndef DTUNNEL_ERRORS_HPP
#define DTUNNEL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dtunnel {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter violates a type invariant (m <= 0, theta < 1, ...).
class InvalidParameters : public Error {
public:
    using Error::Error;
};

/// A dimensionless configuration lies outside its admissible window.
class RegimeViolation : public Error {
public:
    using Error::Error;
};

/// lambda^2 ~ omega^2 + mu^2 (or lambda ~ 0 with nonzero diffusion): the
/// stationary covariance has a vanishing denominator.
class SingularParameters : public Error {
public:
    using Error::Error;
};

/// lambda ~ nu, where the crossing/stuck classification is undefined.
class AmbiguousRegime : public Error {
public:
    using Error::Error;
};

/// Delta <= 0 in the asymptotic penetrability.
class NegativeDelta : public Error {
public:
    using Error::Error;
};

class StepSizeUnderflow : public Error {
public:
    StepSizeUnderflow(const std::string& what, double t) : Error(what), time(t) {}
    double time;
};

/// The integrated state overflowed; `time` is the last time with a finite state.
class NonFiniteState : public Error {
public:
    NonFiniteState(const std::string& what, double t) : Error(what), time(t) {}
    double time;
};

class CFLViolation : public Error {
public:
    using Error::Error;
};

class NegativeDensity : public Error {
public:
    using Error::Error;
};

class MassLoss : public Error {
public:
    using Error::Error;
};

} // namespace dtunnel

#endif // DTUNNEL_ERRORS_HPP
