#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dirac_billiard {

/// Base of every error raised by the library. `kind()` is a stable tag used
/// by the command-line front end to name the failing condition.
class Error : public std::runtime_error {
 public:
  Error(std::string_view kind, const std::string& what)
      : std::runtime_error(std::string(kind) + ": " + what), kind_(kind) {}
  std::string_view kind() const noexcept { return kind_; }

 private:
  std::string_view kind_;
};

#define DIRAC_BILLIARD_ERROR(Name)                                  \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(#Name, what) {}  \
  };

DIRAC_BILLIARD_ERROR(DomainError)
DIRAC_BILLIARD_ERROR(InvalidLaw)
DIRAC_BILLIARD_ERROR(OutOfRange)
DIRAC_BILLIARD_ERROR(SuperluminalWall)
DIRAC_BILLIARD_ERROR(NumericalFailure)
DIRAC_BILLIARD_ERROR(BracketError)
DIRAC_BILLIARD_ERROR(SingularPoint)
DIRAC_BILLIARD_ERROR(IncompleteSpectrum)
DIRAC_BILLIARD_ERROR(InconsistentFormula)
DIRAC_BILLIARD_ERROR(StabilityError)
DIRAC_BILLIARD_ERROR(UsageError)
DIRAC_BILLIARD_ERROR(IoError)

#undef DIRAC_BILLIARD_ERROR

}  // namespace dirac_billiard
