#include "vfm/config_json.hpp"

namespace vfm {

namespace {

void read_params(const nlohmann::json& j, ScheduleParams& p) {
  if (!j.is_object()) throw std::invalid_argument("schedule params must be an object");
  for (const auto& [key, val] : j.items()) {
    if (key == "beta_min") p.beta_min = val.get<double>();
    else if (key == "beta_max") p.beta_max = val.get<double>();
    else if (key == "sigma_min") p.sigma_min = val.get<double>();
    else if (key == "sigma_max") p.sigma_max = val.get<double>();
    else if (key == "literal_sigma") p.literal_sigma = val.get<bool>();
    else throw std::invalid_argument("unknown schedule parameter '" + key + "'");
  }
}

}  // namespace

ScheduleId schedule_from_json(const nlohmann::json& j) {
  if (j.is_string()) return ScheduleId(parse_schedule_kind(j.get<std::string>()));
  const auto kind = parse_schedule_kind(j.at("id").get<std::string>());
  ScheduleParams p;
  if (j.contains("params")) read_params(j.at("params"), p);
  return ScheduleId(kind, p);
}

nlohmann::json schedule_params_to_json(const ScheduleId& id) {
  nlohmann::json p = nlohmann::json::object();
  switch (id.kind) {
    case ScheduleKind::vp:
    case ScheduleKind::sub_vp:
      p["beta_min"] = id.params.beta_min;
      p["beta_max"] = id.params.beta_max;
      break;
    case ScheduleKind::ve:
      p["sigma_min"] = id.params.sigma_min;
      p["sigma_max"] = id.params.sigma_max;
      break;
    case ScheduleKind::third_degree:
      if (id.params.literal_sigma) p["literal_sigma"] = true;
      break;
    default: break;
  }
  return p;
}

nlohmann::json schedule_to_json(const ScheduleId& id) {
  return {{"id", schedule_name(id.kind)}, {"params", schedule_params_to_json(id)}};
}

}  // namespace vfm
