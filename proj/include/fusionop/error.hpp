#pragma once

#include <stdexcept>
#include <string>

namespace fusionop {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes or lengths do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A precondition on an argument value was violated (sizes, ranges, names).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Singular systems, non-finite losses, stability-limit violations.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Malformed, truncated or foreign on-disk data.
class FormatError : public Error {
public:
    using Error::Error;
};

} // namespace fusionop
