#pragma once

#include <stdexcept>
#include <string>

namespace mtcd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or generator parameters.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Tensor or raster dimensions that do not fit the operation.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Data that violates a domain invariant (labels, binary masks, ranges).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A file referenced by a manifest or checkpoint could not be read.
class LoadError : public Error {
public:
    using Error::Error;
};

/// Writing to disk failed.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace mtcd
