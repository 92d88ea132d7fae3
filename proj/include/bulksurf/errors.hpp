#pragma once

#include <stdexcept>
#include <string>

namespace bulksurf {

/// Base of every error the library reports.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MeshError : public Error {
public:
    using Error::Error;
};

/// Argument outside the effective domain of a graph or perturbation.
class DomainError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Newton divergence, singular Jacobian or failed linear solve.
class SolverError : public Error {
public:
    SolverError(const std::string& what, int step = -1, int iterations = 0, double residual = 0.0)
        : Error(what), step_(step), iterations_(iterations), residual_(residual) {}

    int step() const noexcept { return step_; }
    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int step_;
    int iterations_;
    double residual_;
};

}  // namespace bulksurf
