#pragma once

#include <stdexcept>
#include <string>

namespace gsa {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent caller input (dimension mismatch, non-finite
// entries, bad ranges).
class InvalidInputError : public Error {
public:
    using Error::Error;
};

// Matrix is singular (or not square) at the working tolerance.
class SingularMatrixError : public Error {
public:
    using Error::Error;
};

// A channel realization failed a genericity check that holds with
// probability 1 for Gaussian sampling (rank deficiency, singular C_i/E_i).
class DegenerateChannelError : public Error {
public:
    using Error::Error;
};

// A requested configuration has no integer-stream representation
// (e.g. Y channel with (K-1) not dividing M); symbol extension applies.
class NotRepresentableError : public Error {
public:
    using Error::Error;
};

// A synthesis request violates parity or degree-sequence realizability.
class InfeasibleRequestError : public Error {
public:
    using Error::Error;
};

// The antenna configuration cannot support the requested streams; carries
// the binding pair (1-based node labels).
class InfeasibleAntennasError : public Error {
public:
    InfeasibleAntennasError(const std::string& what, int s, int t)
        : Error(what), s_(s), t_(t) {}

    int pair_s() const { return s_; }
    int pair_t() const { return t_; }

private:
    int s_;
    int t_;
};

} // namespace gsa
