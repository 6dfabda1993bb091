#pragma once

#include <stdexcept>
#include <string>

namespace bweb {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument or malformed configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A walker left the declared lattice window, or a horizon does not fit
// inside it (CLI exit code 3).
class WindowOverflow : public Error {
 public:
  using Error::Error;
};

}  // namespace bweb
