#pragma once

#include <stdexcept>
#include <string>

namespace ftme {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Trajectory left the finite range (or the blow-up guard) before the end time.
class TrajectoryBlowUp : public Error {
public:
    TrajectoryBlowUp(double last_finite_time, const std::string& what)
        : Error(what), last_finite_time_(last_finite_time)
    {
    }

    double last_finite_time() const noexcept { return last_finite_time_; }

private:
    double last_finite_time_;
};

class DegenerateMatrix : public Error {
public:
    using Error::Error;
};

/// Precondition violated by the caller (bad dimension, non-positive horizon, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace ftme
