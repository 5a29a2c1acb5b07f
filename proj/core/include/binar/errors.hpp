#pragma once

#include <stdexcept>
#include <string>

namespace binar {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user input: parameters, configuration documents, CSV files.
class ValidationError : public Error {
public:
    using Error::Error;
};

class InvalidParameter : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class HypothesisViolation : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class SingularMatrixError : public Error {
public:
    SingularMatrixError(const std::string& what, double det_magnitude)
        : Error(what + " (|det| = " + std::to_string(det_magnitude) + ")"),
          det_magnitude_(det_magnitude) {}

    double det_magnitude() const noexcept { return det_magnitude_; }

private:
    double det_magnitude_;
};

class PositiveDefiniteError : public Error {
public:
    using Error::Error;
};

/// Tree size would exceed the configured memory budget.
class CapacityError : public Error {
public:
    using Error::Error;
};

class OutOfRangeError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

}  // namespace binar
