#pragma once

#include <stdexcept>
#include <string>

namespace gsn {

// Base class for every error thrown by the library. kind() names the error
// category for machine-readable diagnostics.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
    virtual const char* kind() const { return "Error"; }
};

#define GSN_ERROR_TYPE(Name)                                  \
    struct Name : Error {                                     \
        using Error::Error;                                   \
        const char* kind() const override { return #Name; }   \
    };

GSN_ERROR_TYPE(DimMismatch)
GSN_ERROR_TYPE(AllZeroMap)
GSN_ERROR_TYPE(FewerThanTwoMaps)
GSN_ERROR_TYPE(FewerThanTwoEntities)
GSN_ERROR_TYPE(NonPositiveEntry)
GSN_ERROR_TYPE(ProbabilityOverflow)
GSN_ERROR_TYPE(BadRange)
GSN_ERROR_TYPE(DegenerateSchedule)
GSN_ERROR_TYPE(OutOfRange)
GSN_ERROR_TYPE(EmptyTrajectory)
GSN_ERROR_TYPE(DegenerateVariance)
GSN_ERROR_TYPE(NonFiniteGradient)
GSN_ERROR_TYPE(ParseError)
GSN_ERROR_TYPE(ValidationError)
GSN_ERROR_TYPE(IoError)

#undef GSN_ERROR_TYPE

}  // namespace gsn
