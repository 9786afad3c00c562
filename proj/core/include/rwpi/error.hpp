#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rwpi {

enum class ErrorCode {
  invalid_exponent,
  invalid_argument,
  degenerate_column,
  empty_input,
  kind_mismatch,
  dimension,
  unbounded_law,
  invalid_factor,
  invalid_level,
  invalid_penalty,
  rank_deficient,
  config,
  numeric_bracket,
  parse,
  io,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so
// callers (the CLI in particular) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rwpi
