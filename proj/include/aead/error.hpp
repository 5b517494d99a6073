#pragma once

#include <stdexcept>
#include <string>

namespace aead {

// Root of every error thrown by the library. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Vector/matrix dimensions do not line up.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Invalid architecture, hyperparameter or other configuration value.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A documented precondition was violated by the caller.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Non-finite value where a finite one is required.
class NumericError : public Error {
public:
    using Error::Error;
};

// Training diverged or could not run.
class TrainingError : public Error {
public:
    using Error::Error;
};

// Object used before it was put into a usable state.
class StateError : public Error {
public:
    using Error::Error;
};

// Required CSV column is missing.
class SchemaError : public Error {
public:
    using Error::Error;
};

// Input value violates a data contract (column count, label range, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

// File exists but cannot be interpreted.
class FormatError : public Error {
public:
    using Error::Error;
};

// Checkpoint written by an unsupported format version.
class VersionError : public FormatError {
public:
    using FormatError::FormatError;
};

// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace aead
