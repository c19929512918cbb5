#pragma once

#include <stdexcept>
#include <string>

namespace cpsdiag {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input files, unknown identifiers, violated preconditions.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Divergence or non-finite values produced during computation.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace cpsdiag
