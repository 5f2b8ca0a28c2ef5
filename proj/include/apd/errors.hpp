#pragma once

#include <stdexcept>
#include <string>

namespace apd {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension mismatch, malformed descriptor, bad argument value.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A point lies outside the set it is supposed to belong to.
class InfeasibleError : public Error {
 public:
  InfeasibleError(std::string set_name, const std::string& what)
      : Error(what), set_name_(std::move(set_name)) {}
  const std::string& set_name() const noexcept { return set_name_; }

 private:
  std::string set_name_;
};

/// Requested closed form does not exist for this (geometry, set, term) combination.
class UnsupportedEvaluation : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a function (log of zero, t < 2, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class InvalidConstants : public Error {
 public:
  using Error::Error;
};

class DegenerateSchedule : public Error {
 public:
  using Error::Error;
};

class HorizonError : public Error {
 public:
  using Error::Error;
};

class UnavailableCertificate : public Error {
 public:
  using Error::Error;
};

class InsufficientCapture : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace apd
