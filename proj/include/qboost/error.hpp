#pragma once

#include <stdexcept>
#include <string>

namespace qboost {

// Broad failure classes. The CLI maps them onto exit codes.
enum class ErrorKind {
  Usage,      // bad arguments or contract violation by the caller
  Data,       // malformed or inconsistent input data
  Numerical,  // singular systems, non-finite values
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::Numerical, what) {}
};

int exit_code_for(ErrorKind kind) noexcept;

}  // namespace qboost
