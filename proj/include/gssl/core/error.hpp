#pragma once

#include <stdexcept>
#include <string>

namespace gssl {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A configuration value is out of its admissible range.
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

// Caller-supplied data violates a precondition (non-finite values, bad labels).
class InputError : public Error {
 public:
  using Error::Error;
};

// A file does not match its declared binary or text layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Divergence or an internal numerical inconsistency.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace gssl
