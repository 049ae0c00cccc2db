#pragma once

#include "json.hpp"

#include "vfm/schedules.hpp"

namespace vfm {

// {"id": "vp", "params": {...}} or a bare id string.
ScheduleId schedule_from_json(const nlohmann::json& j);
nlohmann::json schedule_to_json(const ScheduleId& id);
nlohmann::json schedule_params_to_json(const ScheduleId& id);

}  // namespace vfm
