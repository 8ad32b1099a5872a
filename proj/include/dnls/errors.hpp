#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dnls {

/// Base of every error raised by the library. `kind()` is a stable identifier
/// used in the CLI's JSON error records.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define DNLS_DEFINE_ERROR(Name)                                        \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(#Name, what) {}     \
  };

DNLS_DEFINE_ERROR(GridMismatch)
DNLS_DEFINE_ERROR(InvalidGrid)
DNLS_DEFINE_ERROR(AxisOutOfRange)
DNLS_DEFINE_ERROR(NonFiniteMultiplier)
DNLS_DEFINE_ERROR(DegenerateNonlinearity)
DNLS_DEFINE_ERROR(InadmissibleParameters)
DNLS_DEFINE_ERROR(InvalidParameters)
DNLS_DEFINE_ERROR(NonpositiveLevel)
DNLS_DEFINE_ERROR(ResolutionLoss)
DNLS_DEFINE_ERROR(DomainTooSmall)
DNLS_DEFINE_ERROR(WrongDimension)
DNLS_DEFINE_ERROR(FitWindowEmpty)
DNLS_DEFINE_ERROR(ParseError)
DNLS_DEFINE_ERROR(ValidationError)
DNLS_DEFINE_ERROR(FormatError)
DNLS_DEFINE_ERROR(LengthMismatch)
DNLS_DEFINE_ERROR(UnsupportedVersion)
DNLS_DEFINE_ERROR(IoError)

#undef DNLS_DEFINE_ERROR

class NoConvergence : public Error {
 public:
  NoConvergence(std::size_t iterations, double residual)
      : Error("NoConvergence",
              "descent stopped after " + std::to_string(iterations) +
                  " iterations with residual " + std::to_string(residual)),
        iterations_(iterations),
        residual_(residual) {}
  std::size_t iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  std::size_t iterations_;
  double residual_;
};

/// Raised by a single time step when the state stops being finite.
/// `evolve` catches it and records a divergence event instead.
class NonFinite : public Error {
 public:
  explicit NonFinite(double time)
      : Error("NonFinite", "state became non-finite at t=" + std::to_string(time)),
        time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace dnls
