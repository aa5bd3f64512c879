#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tikhreg {

enum class Errc {
  not_spd,
  not_symmetric,
  convergence_failure,
  dimension_mismatch,
  domain_error,
  size_cap,
  insufficient_spectrum,
  non_finite_lambda,
  zero_solution_norm,
  degenerate_solution,
  degenerate_sample,
  invalid_argument,
  io_error,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::not_spd: return "NotSPD";
    case Errc::not_symmetric: return "NotSymmetric";
    case Errc::convergence_failure: return "ConvergenceFailure";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::domain_error: return "DomainError";
    case Errc::size_cap: return "SizeCap";
    case Errc::insufficient_spectrum: return "InsufficientSpectrum";
    case Errc::non_finite_lambda: return "NonFiniteLambda";
    case Errc::zero_solution_norm: return "ZeroSolutionNorm";
    case Errc::degenerate_solution: return "DegenerateSolution";
    case Errc::degenerate_sample: return "DegenerateSample";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::io_error: return "IOError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

namespace detail {

inline void require(bool cond, Errc code, const char* what) {
  if (!cond) throw Error(code, what);
}

}  // namespace detail
}  // namespace tikhreg
