#pragma once

#include <stdexcept>
#include <string>

namespace gzsl {

// Invalid or inconsistent input: malformed files, bad labels, shape
// mismatches, violated preconditions. Maps to CLI exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical failure: no convergence, singular pencil, non-finite loss.
// Maps to CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gzsl
