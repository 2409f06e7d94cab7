#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace invdp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string format_vector(const Eigen::VectorXd& v) {
    std::string out = "(";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i > 0) out += ", ";
        out += std::to_string(v[i]);
    }
    return out + ")";
}

}  // namespace detail

/// A policy produced an action outside the admissible set.
class InadmissibleAction : public Error {
public:
    InadmissibleAction(std::size_t step, Eigen::VectorXd state, Eigen::VectorXd action)
        : Error("inadmissible action " + detail::format_vector(action) + " at state " +
                detail::format_vector(state) + " (step " + std::to_string(step) + ")"),
          step(step), state(std::move(state)), action(std::move(action)) {}

    std::size_t step;
    Eigen::VectorXd state;
    Eigen::VectorXd action;
};

/// Transition or reward returned NaN or infinity.
class NonFiniteValue : public Error {
public:
    explicit NonFiniteValue(const std::string& what) : Error("non-finite value: " + what) {}
};

/// No candidate action is admissible at the given state.
class NoAdmissibleAction : public Error {
public:
    explicit NoAdmissibleAction(Eigen::VectorXd state)
        : Error("no admissible candidate action at state " + detail::format_vector(state)),
          state(std::move(state)) {}

    Eigen::VectorXd state;
};

class EmptySampleSet : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

/// Numerical integration produced a non-finite state.
class NonFiniteState : public Error {
public:
    using Error::Error;
};

class InertiaNotPD : public Error {
public:
    using Error::Error;
};

class ActuationSingular : public Error {
public:
    using Error::Error;
};

class NotHurwitz : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace invdp
