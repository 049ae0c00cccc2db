#include "vfm/experiments/training.hpp"

#include "vfm/config_json.hpp"
#include "vfm/experiments/io.hpp"
#include "vfm/experiments/runner.hpp"

namespace vfm::exp {

using nlohmann::json;

std::string loss_name(nn::LossKind k) {
  return k == nn::LossKind::velocity_matching ? "velocity_matching" : "noise_matching";
}

nn::LossKind parse_loss(std::string_view name) {
  if (name == "velocity_matching") return nn::LossKind::velocity_matching;
  if (name == "noise_matching") return nn::LossKind::noise_matching;
  throw std::invalid_argument("unknown loss '" + std::string(name) + "'");
}

namespace {

bool has_only(const json& j, std::initializer_list<const char*> keys, std::string* bad) {
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : keys) ok = ok || k == a;
    if (!ok) {
      *bad = k;
      return false;
    }
  }
  return true;
}

template <class T>
T get_at(const json& j, const char* key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("/") + key, e.what());
  }
}

// Training keys shared by train and reflow configs.
void read_training(const json& j, nn::TrainConfig& c, std::uint64_t& data_seed) {
  c.iterations = get_at<int>(j, "iterations", c.iterations);
  c.batch = get_at<int>(j, "batch", c.batch);
  c.lr = get_at<double>(j, "lr", c.lr);
  c.n_data = get_at<std::size_t>(j, "n_data", c.n_data);
  c.seed = get_at<std::uint64_t>(j, "seed", c.seed);
  data_seed = get_at<std::uint64_t>(j, "data_seed", data_seed);
  if (c.iterations <= 0) throw ConfigError("/iterations", "expected a positive integer");
  if (c.batch <= 0) throw ConfigError("/batch", "expected a positive integer");
  if (!(c.lr > 0.0)) throw ConfigError("/lr", "expected a positive number");
  if (c.n_data == 0) throw ConfigError("/n_data", "expected a positive integer");
}

void read_mixtures(const json& j, GaussianMixture& p0, GaussianMixture& p1) {
  if (!j.contains("data")) return;
  // Reuse the experiment parser so both accept the same forms.
  const auto c = parse_experiment_config(json{{"data", j["data"]}});
  p0 = c.p0;
  p1 = c.p1;
}

}  // namespace

TrainJob parse_train_job(const json& j) {
  if (!j.is_object()) throw ConfigError("", "expected an object");
  std::string bad;
  if (!has_only(j, {"schedule", "loss", "iterations", "batch", "lr", "n_data", "seed", "data", "data_seed"}, &bad))
    throw ConfigError("/" + bad, "unknown key");
  TrainJob job;
  if (j.contains("schedule")) {
    try {
      job.schedule = schedule_from_json(j["schedule"]);
    } catch (const std::exception& e) {
      throw ConfigError("/schedule", e.what());
    }
  }
  if (j.contains("loss")) {
    try {
      job.config.loss = parse_loss(j["loss"].get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError("/loss", e.what());
    }
  }
  read_training(j, job.config, job.data_seed);
  read_mixtures(j, job.p0, job.p1);
  return job;
}

TrainOutcome run_train_job(const TrainJob& job) {
  const auto data = make_toy({job.p0, job.p1, job.config.n_data, job.data_seed});
  auto res = nn::train(job.config, data.p0, data.p1, job.schedule);
  const auto kind =
      job.config.loss == nn::LossKind::velocity_matching ? FieldKind::velocity_model : FieldKind::noise_model;
  return {{std::move(res.params), job.schedule, kind}, std::move(res.losses)};
}

ReflowJob parse_reflow_job(const json& j) {
  if (!j.is_object()) throw ConfigError("", "expected an object");
  std::string bad;
  if (!has_only(j, {"iterations", "batch", "lr", "n_data", "seed", "data", "data_seed", "flow", "solver", "steps"}, &bad))
    throw ConfigError("/" + bad, "unknown key");
  ReflowJob job;
  read_training(j, job.config, job.data_seed);
  GaussianMixture p0 = toy_p0();
  read_mixtures(j, p0, job.p1);
  // Flow, solver and steps go through the experiment parser for the same
  // error paths.
  json e = json::object();
  for (const char* k : {"flow", "solver", "steps"})
    if (j.contains(k)) e[std::string(k) == "flow" ? "flows" : std::string(k) == "solver" ? "solvers" : "steps"] = json::array({j[k]});
  try {
    const auto c = parse_experiment_config(e);
    if (j.contains("flow")) job.flow = c.flows[0];
    if (j.contains("solver")) job.solver = c.solvers[0];
    if (j.contains("steps")) job.steps = c.steps[0];
  } catch (const ConfigError& err) {
    // "/flows/0" -> "/flow"
    const auto p = err.path();
    const auto key = p.substr(1, p.find('/', 1) - 1);
    const std::string single = key == "flows" ? "flow" : key == "solvers" ? "solver" : key;
    const std::string what = err.what();
    throw ConfigError("/" + single, what.substr(std::min(what.size(), (p.empty() ? 1 : p.size()) + 2)));
  }
  return job;
}

ReflowOutcome run_reflow_job(const ReflowJob& job, const nn::Checkpoint& teacher, double eps) {
  const auto src = std::make_shared<nn::MlpSource>(teacher.params, teacher.kind);
  const TransformedField field(src, teacher.schedule, job.flow, eps);
  const Batch x1 = sample_mixture(job.p1, job.config.n_data, derive_seed(job.data_seed, 5));
  auto res = nn::reflow(field, job.solver, time_grid(job.steps), job.config, x1);
  return {{std::move(res.student.params), ScheduleId(ScheduleKind::rectified), FieldKind::velocity_model},
          std::move(res.student.losses)};
}

}  // namespace vfm::exp
