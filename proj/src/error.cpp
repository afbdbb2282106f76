#include "mapfilt/error.hpp"

namespace mapfilt {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::invalid_lag: return "invalid-lag";
    case Errc::invalid_length: return "invalid-length";
    case Errc::shape: return "shape";
    case Errc::stationarity: return "stationarity";
    case Errc::conditioning: return "conditioning";
    case Errc::factorization: return "factorization";
    case Errc::noninvertible: return "noninvertible";
    case Errc::symmetry: return "symmetry-violation";
    case Errc::consistency: return "numerical-consistency";
    case Errc::undefined_metric: return "undefined-metric";
    case Errc::io: return "io";
    case Errc::parse: return "parse";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

bool Error::numerical() const noexcept {
  switch (code_) {
    case Errc::stationarity:
    case Errc::conditioning:
    case Errc::factorization:
    case Errc::noninvertible:
    case Errc::symmetry:
    case Errc::consistency:
    case Errc::undefined_metric:
      return true;
    default:
      return false;
  }
}

}  // namespace mapfilt
