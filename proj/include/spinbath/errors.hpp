// errors.hpp: exception types shared by every spinbath module

#pragma once

#include <stdexcept>
#include <string>

namespace spinbath {

// Inconsistent or out-of-domain physical parameters.
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A configuration space or Hilbert space larger than the selected backend can hold.
struct CapacityError : std::length_error {
    using std::length_error::length_error;
};

// Eigensolver non-convergence, invalid density matrices, failing reduction terms.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad experiment configuration; the message names the offending field.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace spinbath
