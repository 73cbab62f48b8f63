#pragma once

#include <stdexcept>
#include <string>

namespace endodiff {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A DGP description violates its invariants (non-SPD covariance,
/// dimension mismatch, unstable feedback |alpha*beta| >= 1, ...).
struct InvalidSpec : Error {
    using Error::Error;
};

/// Requested sample size cannot identify the coefficients (n <= p).
struct SampleTooSmall : Error {
    using Error::Error;
};

/// Matrix/vector dimensions do not line up.
struct ShapeMismatch : Error {
    using Error::Error;
};

/// Design matrix condition number exceeds the solver gate (1e12).
struct RankDeficient : Error {
    using Error::Error;
};

/// An event split would leave a segment with fewer than p+1 rows.
struct WindowTooLarge : Error {
    using Error::Error;
};

/// Event index outside [1, T-1].
struct IndexOutOfRange : Error {
    using Error::Error;
};

/// Two scenario sides are not comparable (different p).
struct IncompatiblePair : Error {
    using Error::Error;
};

/// Syntactically malformed input document; message carries the location.
struct ParseError : Error {
    using Error::Error;
};

/// Well-formed but semantically invalid configuration; message names the
/// offending field path (e.g. "scenarios[0].spec_b.x_cov").
struct ValidationError : Error {
    using Error::Error;
};

/// Filesystem failure while reading or writing.
struct IoError : Error {
    using Error::Error;
};

} // namespace endodiff
