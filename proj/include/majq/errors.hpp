// Copyright 2026 The majq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace majq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mismatched mode counts or array shapes.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Mode or Majorana index outside [0, 2M).
class IndexError : public Error {
public:
    using Error::Error;
};

/// An operation was called outside its documented domain.
class PreconditionError : public Error {
public:
    PreconditionError(const std::string& what, double measured)
        : Error(what), measured_(measured) {}

    double measured() const noexcept { return measured_; }

private:
    double measured_;
};

/// The quadratic form of the Gaussian basis cannot be built at this phase point.
class SingularityError : public Error {
public:
    SingularityError(const std::string& what, double eigenvalue_modulus)
        : Error(what), modulus_(eigenvalue_modulus) {}

    double eigenvalue_modulus() const noexcept { return modulus_; }

private:
    double modulus_;
};

/// Normal-ordered exponential has (numerically) vanishing trace.
class DegenerateBasisError : public Error {
public:
    using Error::Error;
};

/// A finite-difference stencil touched the singular set.
class StencilError : public Error {
public:
    using Error::Error;
};

/// Drift-flow integration produced a non-finite state.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, long step) : Error(what), step_(step) {}

    long step() const noexcept { return step_; }

private:
    long step_;
};

/// Malformed or invalid model configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace majq
