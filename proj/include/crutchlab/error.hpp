#pragma once

#include <stdexcept>
#include <string>

namespace crutchlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied arguments that violate a documented precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

}  // namespace crutchlab
