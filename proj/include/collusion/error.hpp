#pragma once

#include <stdexcept>
#include <string>

namespace collusion {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: dimensions, indices, out-of-range parameters, bad files.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A well-formed request the library declines to run (enumeration caps,
// oversized grids).
class RefusalError : public Error {
 public:
  using Error::Error;
};

// A numerical routine could not produce a trustworthy answer.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace collusion
