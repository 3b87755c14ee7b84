#pragma once

#include <stdexcept>
#include <string>

namespace isq {

// Every failure raised by the library derives from Error so that the CLI can
// map it to a numerical-failure exit code.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidRange : public Error {
public:
  using Error::Error;
};

// Coupling above the sharp Hardy constant 1/4.
class SupercriticalCoupling : public Error {
public:
  using Error::Error;
};

class DomainError : public Error {
public:
  using Error::Error;
};

class ConvergenceFailure : public Error {
public:
  ConvergenceFailure(const std::string &what, long index)
      : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}
  long index() const { return index_; }

private:
  long index_;
};

// The quadrature sphere passes too close to a kernel singularity.
class SingularConfiguration : public Error {
public:
  using Error::Error;
};

class RegionError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace isq
