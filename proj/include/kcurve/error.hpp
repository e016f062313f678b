#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kcurve {

/// Bad argument or precondition violation.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Effective ridge is zero and the critical coefficient is zero as well (0/0).
class SingularRegime : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Two independent evaluation routes disagree beyond tolerance.
class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Adaptive quadrature or a factorization did not converge.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, std::vector<double> jitter_ladder = {})
        : std::runtime_error(what), jitter_ladder_(std::move(jitter_ladder)) {}

    /// Diagonal shifts attempted before giving up (empty when not a solve failure).
    const std::vector<double>& jitter_ladder() const noexcept { return jitter_ladder_; }

private:
    std::vector<double> jitter_ladder_;
};

/// Invalid experiment configuration (maps to CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace kcurve
