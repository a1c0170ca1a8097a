#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace petrirl {

enum class ErrorCode {
  invalid_range,
  invalid_seed,
  invalid_instance,
  parse_error,
  dimension_mismatch,
  machine_index_out_of_range,
  capacity_too_small,
  unknown_transition,
  guard_violation,
  masked_action,
  episode_terminated,
  bad_index,
  not_terminated,
  empty_mask,
  empty_trajectory,
  shape_mismatch,
  non_finite_loss,
  zero_baseline,
  invalid_config,
  io_error,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (and tests) can branch on the kind rather than the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace petrirl
