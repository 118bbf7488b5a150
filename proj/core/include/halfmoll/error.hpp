#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace halfmoll {

enum class ErrorKind {
  invalid_parameter,
  dimension,
  domain,
  out_of_horizon,
  truncation,
  stability,
  lookup,
  hypothesis_violation,
  coverage,
  under_resolved,
  scale_too_coarse,
  io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace halfmoll
