#pragma once

#include <stdexcept>
#include <string>

namespace costcode {

// Invalid input: malformed model, out-of-range parameter, unsupported mode.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// A computation could not be completed to the required certainty
// (e.g. interval precision exhausted while certifying a codeword).
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace costcode
