#pragma once

#include <stdexcept>
#include <string>

namespace eprb {

// Base class for every failure raised by the library. The CLI maps these to
// exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace eprb
