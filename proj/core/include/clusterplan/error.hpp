#pragma once

#include <stdexcept>
#include <string>

namespace clusterplan {

// Base for every domain error raised by the library. The CLI maps these to
// exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad command usage (missing section, empty argument list). Exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace clusterplan
