#pragma once

#include <stdexcept>
#include <string>

namespace ilreg {

// Error taxonomy. The CLI maps these onto exit codes:
//   parse/config/validation/domain/shape -> 2, numeric -> 3, io -> 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error {
    using Error::Error;
};

struct ValidationError : Error {
    using Error::Error;
};

struct MetadataError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

// Pose or parameter outside its geometric domain (psi outside the unit disk,
// degenerate registration frame, unreachable delta, point behind the camera).
struct DomainError : Error {
    using Error::Error;
};

struct ShapeError : Error {
    using Error::Error;
};

struct NumericError : Error {
    using Error::Error;
};

struct SingularCovarianceError : NumericError {
    using NumericError::NumericError;
};

struct EmptyPopulationError : NumericError {
    using NumericError::NumericError;
};

struct TooFewPixelsError : NumericError {
    using NumericError::NumericError;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace ilreg
