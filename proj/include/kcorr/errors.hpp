#pragma once

#include <stdexcept>
#include <string>

namespace kcorr {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input (config files, parameter combinations).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Failure of a numerical precondition or postcondition.
class NumericalError : public Error {
public:
  using Error::Error;
};

#define KCORR_DEFINE_ERROR(Name, Base)                                         \
  class Name : public Base {                                                   \
  public:                                                                      \
    explicit Name(const std::string& what) : Base(#Name ": " + what) {}        \
  }

KCORR_DEFINE_ERROR(ZeroInitialVector, NumericalError);
KCORR_DEFINE_ERROR(PropagatorFailure, NumericalError);
KCORR_DEFINE_ERROR(SingularGram, NumericalError);
KCORR_DEFINE_ERROR(IndexOutOfRange, NumericalError);
KCORR_DEFINE_ERROR(RealnessViolation, NumericalError);
KCORR_DEFINE_ERROR(ResolutionError, NumericalError);
KCORR_DEFINE_ERROR(GeometryMismatch, NumericalError);
KCORR_DEFINE_ERROR(TruncationError, NumericalError);
KCORR_DEFINE_ERROR(SystemMismatch, NumericalError);
KCORR_DEFINE_ERROR(MissingKickData, NumericalError);
KCORR_DEFINE_ERROR(NumericalSingularity, NumericalError);
KCORR_DEFINE_ERROR(FitFailure, NumericalError);
KCORR_DEFINE_ERROR(StorageError, Error);

#undef KCORR_DEFINE_ERROR

} // namespace kcorr
