#include "vfm/nn/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "vfm/config_json.hpp"

namespace vfm::nn {

namespace {

constexpr const char* kBlockNames[6] = {"W1", "b1", "W2", "b2", "W3", "b3"};

}  // namespace

std::string checkpoint_to_string(const Checkpoint& c) {
  c.params.validate();
  nlohmann::json j;
  j["version"] = kCheckpointVersion;
  j["dim"] = c.params.dim;
  j["hidden"] = c.params.hidden;
  j["schedule_id"] = schedule_name(c.schedule.kind);
  j["schedule_params"] = schedule_params_to_json(c.schedule);
  j["field_kind"] = field_kind_name(c.kind);
  auto blocks = c.params.blocks();
  for (std::size_t k = 0; k < blocks.size(); ++k) j["weights"][kBlockNames[k]] = *blocks[k];
  return j.dump() + "\n";
}

Checkpoint checkpoint_from_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint: malformed JSON: ") + e.what());
  }
  try {
    if (j.at("version").get<int>() != kCheckpointVersion) throw CheckpointError("checkpoint: unsupported version");
    Checkpoint c;
    c.params.dim = j.at("dim").get<std::size_t>();
    c.params.hidden = j.at("hidden").get<std::size_t>();
    nlohmann::json sched = {{"id", j.at("schedule_id")}};
    if (j.contains("schedule_params")) sched["params"] = j.at("schedule_params");
    c.schedule = schedule_from_json(sched);
    c.kind = parse_field_kind(j.at("field_kind").get<std::string>());
    auto blocks = c.params.blocks();
    for (std::size_t k = 0; k < blocks.size(); ++k)
      *blocks[k] = j.at("weights").at(kBlockNames[k]).get<std::vector<double>>();
    c.params.validate();
    return c;
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& c, const std::string& path) {
  const auto text = checkpoint_to_string(c);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("checkpoint: cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw CheckpointError("checkpoint: write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_string(ss.str());
}

}  // namespace vfm::nn
