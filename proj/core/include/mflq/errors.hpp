#pragma once

#include <stdexcept>
#include <string>

namespace mflq {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Matrix shapes disagree with (n, m, N).
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Malformed problem document; the message carries a JSON path.
class ParseError : public Error {
public:
    using Error::Error;
};

/// The standard condition (Q, Q+Qbar >= 0; R, R+Rbar > 0; G, G+Gbar >= 0) fails.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A positive-definite factorization failed.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Scenario tree would be too large to assemble densely.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// Invalid caller argument (zero path count, unsupported initial condition...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

}  // namespace mflq
