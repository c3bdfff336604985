#pragma once

#include <stdexcept>
#include <string>

namespace fbmp {

// Error taxonomy shared by the whole pipeline. The CLI maps these onto its
// exit codes: parameter/dimension problems -> 1, file problems -> 2,
// numerical failures -> 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};

struct ParamError : Error {
    using Error::Error;
};

struct NumericalError : Error {
    using Error::Error;
};

struct FormatError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace fbmp
