#pragma once

#include <stdexcept>
#include <string>

namespace jumpsyn {

// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A matrix has a shape inconsistent with the declared dimensions.
struct DimensionMismatch : Error {
    using Error::Error;
};

// A transition-rate matrix violates generator structure (row sums, signs).
struct GeneratorInvalid : Error {
    using Error::Error;
};

// A scalar parameter is outside its admissible range.
struct RangeError : Error {
    using Error::Error;
};

// Input document could not be parsed; message carries the location.
struct ParseError : Error {
    using Error::Error;
};

// Mode or state index outside {1..N}.
struct IndexOutOfRange : Error {
    using Error::Error;
};

// A claimed feasibility certificate fails post-hoc eigenvalue verification.
struct CertificateInvalid : Error {
    using Error::Error;
};

// Integration step exceeds what the delay bound allows.
struct StepTooLarge : Error {
    using Error::Error;
};

// State blew up during integration.
struct NonFinite : Error {
    using Error::Error;
};

} // namespace jumpsyn
