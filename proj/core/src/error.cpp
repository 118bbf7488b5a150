#include "halfmoll/error.hpp"

namespace halfmoll {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::domain: return "domain";
    case ErrorKind::out_of_horizon: return "out-of-horizon";
    case ErrorKind::truncation: return "truncation-too-small";
    case ErrorKind::stability: return "stability";
    case ErrorKind::lookup: return "lookup";
    case ErrorKind::hypothesis_violation: return "hypothesis-violation";
    case ErrorKind::coverage: return "coverage";
    case ErrorKind::under_resolved: return "under-resolved-kernel";
    case ErrorKind::scale_too_coarse: return "scale-too-coarse";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace halfmoll
