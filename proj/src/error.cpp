#include "petrirl/error.hpp"

namespace petrirl {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_range: return "invalid-range";
    case ErrorCode::invalid_seed: return "invalid-seed";
    case ErrorCode::invalid_instance: return "invalid-instance";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::machine_index_out_of_range: return "machine-index-out-of-range";
    case ErrorCode::capacity_too_small: return "capacity-too-small";
    case ErrorCode::unknown_transition: return "unknown-transition";
    case ErrorCode::guard_violation: return "guard-violation";
    case ErrorCode::masked_action: return "masked-action";
    case ErrorCode::episode_terminated: return "episode-terminated";
    case ErrorCode::bad_index: return "bad-index";
    case ErrorCode::not_terminated: return "not-terminated";
    case ErrorCode::empty_mask: return "empty-mask";
    case ErrorCode::empty_trajectory: return "empty-trajectory";
    case ErrorCode::shape_mismatch: return "shape-mismatch";
    case ErrorCode::non_finite_loss: return "non-finite-loss";
    case ErrorCode::zero_baseline: return "zero-baseline";
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

}  // namespace petrirl
