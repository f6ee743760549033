#pragma once

#include <stdexcept>
#include <string>

namespace spm {

// Evaluation exactly on the pole of the potential.
class PoleError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Endpoints that do not bracket the pole, or F(a) <= 0.
class InvalidSupport : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class Infeasible : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class NoConvergence : public std::runtime_error {
public:
    NoConvergence(const std::string& what, double best_residual)
        : std::runtime_error(what), best_(best_residual) {}
    double best_residual() const { return best_; }

private:
    double best_;
};

class OnCutError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class CoincidentParticles : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class OutOfRange : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace spm
