#pragma once

#include <stdexcept>
#include <string>

namespace rrlab {

// Base for every failure the library reports. The CLI maps these to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define RRLAB_ERROR(Name)                       \
    class Name : public Error {                 \
    public:                                     \
        using Error::Error;                     \
    }

RRLAB_ERROR(OutOfRange);
RRLAB_ERROR(DepthExceeded);
RRLAB_ERROR(Unresolvable);
RRLAB_ERROR(OutsideTower);
RRLAB_ERROR(RangeViolation);
RRLAB_ERROR(EvenDenominator);
RRLAB_ERROR(MassMismatch);
RRLAB_ERROR(SizeExceeded);
RRLAB_ERROR(InvalidInput);

#undef RRLAB_ERROR

}  // namespace rrlab
