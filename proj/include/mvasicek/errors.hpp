#pragma once

#include <stdexcept>
#include <string>

namespace mvasicek {

/// Bad input: parameters outside the model region, t > T, malformed files.
/// The CLI maps this to exit code 2.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical engine failed (quadrature did not converge, NaN in a state,
/// PDE blew up). The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mvasicek
