#pragma once

#include <stdexcept>
#include <string>

namespace homsense {

// Validation failures map to CLI exit code 2, numerical failures to 3.
enum class ErrorKind { Validation, Numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), kind_(kind), code_(std::move(code)) {}
  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

#define HOMSENSE_DEFINE_ERROR(Name, Kind)                                    \
  class Name : public Error {                                                \
   public:                                                                   \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, #Name, what) {} \
  };

HOMSENSE_DEFINE_ERROR(InvalidSpec, Validation)
HOMSENSE_DEFINE_ERROR(InvalidAlpha, Validation)
HOMSENSE_DEFINE_ERROR(NonConvergentSum, Numerical)
HOMSENSE_DEFINE_ERROR(QuadratureFailure, Numerical)
HOMSENSE_DEFINE_ERROR(ZeroAnchor, Numerical)
HOMSENSE_DEFINE_ERROR(GridTooCoarse, Numerical)
HOMSENSE_DEFINE_ERROR(SingularMatrix, Numerical)
HOMSENSE_DEFINE_ERROR(NoRoot, Numerical)
HOMSENSE_DEFINE_ERROR(NonMonotoneWindow, Numerical)

#undef HOMSENSE_DEFINE_ERROR

}  // namespace homsense
