#pragma once

#include <stdexcept>
#include <string>

#include "vfm/nn/mlp.hpp"
#include "vfm/schedules.hpp"
#include "vfm/velocity.hpp"

namespace vfm::nn {

struct Checkpoint {
  MLPParams params;
  ScheduleId schedule;
  FieldKind kind = FieldKind::velocity_model;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kCheckpointVersion = 1;

std::string checkpoint_to_string(const Checkpoint& c);
Checkpoint checkpoint_from_string(const std::string& text);

void save_checkpoint(const Checkpoint& c, const std::string& path);
// Throws CheckpointError on unreadable, malformed or inconsistent files.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace vfm::nn
