#pragma once

#include <stdexcept>
#include <string>

namespace mapfilt {

enum class Errc {
  invalid_argument,
  invalid_lag,
  invalid_length,
  shape,
  stationarity,
  conditioning,
  factorization,
  noninvertible,
  symmetry,
  consistency,
  undefined_metric,
  io,
  parse,
};

const char* errc_name(Errc code) noexcept;

/// Every failure in the library is reported as an Error carrying a code.
/// Codes at or after Errc::stationarity are numerical failures; the rest are
/// input/usage problems.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }
  bool numerical() const noexcept;

 private:
  Errc code_;
};

}  // namespace mapfilt
