#pragma once

#include <stdexcept>
#include <string>

namespace passfeas {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An input violates a documented invariant (bad field, malformed file).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// The passing-maneuver closed form has no real solution for the scenario.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A range query asked for a speed outside the calibrated interval.
class ExtrapolationError : public Error {
public:
    using Error::Error;
};

/// A terrain query fell outside the sampled span of the profile.
class OutOfProfile : public Error {
public:
    using Error::Error;
};

/// An encounter never lost contact before the configured time limit.
class DurationLimitExceeded : public Error {
public:
    using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace passfeas
