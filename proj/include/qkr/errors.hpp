#pragma once

#include <stdexcept>
#include <string>

namespace qkr {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IndexOutOfRange : Error {
    using Error::Error;
};

struct DegenerateGate : Error {
    using Error::Error;
};

struct InvalidPower : Error {
    using Error::Error;
};

struct SizeMismatch : Error {
    using Error::Error;
};

struct InvalidWidth : Error {
    using Error::Error;
};

struct NoTransitionInRange : Error {
    using Error::Error;
};

struct InsufficientPoints : Error {
    using Error::Error;
};

struct NonPositiveShift : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

} // namespace qkr
