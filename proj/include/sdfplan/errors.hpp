#pragma once

#include <stdexcept>
#include <string>

namespace sdfplan {

// Malformed or inconsistent input: files, descriptions, arguments. The CLI maps
// this to exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A computation that ran but could not produce a valid result (divergence,
// non-finite state, failed factorization). The CLI maps this to exit code 1.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sdfplan
