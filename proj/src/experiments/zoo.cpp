#include "vfm/experiments/zoo.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vfm/config_json.hpp"
#include "vfm/experiments/runner.hpp"

namespace vfm::exp {

namespace fs = std::filesystem;
using nlohmann::json;

TrainJob zoo_train_job(ScheduleKind schedule, nn::LossKind loss) {
  TrainJob job;
  job.schedule = ScheduleId(schedule);
  job.config.loss = loss;
  job.config.iterations = kZooIterations;
  job.config.batch = kZooBatch;
  return job;
}

ReflowJob zoo_reflow_job() {
  ReflowJob job;
  job.config.iterations = kZooIterations;
  job.config.batch = kZooBatch;
  return job;
}

namespace {

json training_json(const nn::TrainConfig& c, std::uint64_t data_seed) {
  if (c.lambda_t) throw std::invalid_argument("jobs with a time weight have no JSON form");
  return {{"loss", loss_name(c.loss)}, {"iterations", c.iterations}, {"batch", c.batch}, {"lr", c.lr},
          {"n_data", c.n_data},        {"seed", c.seed},             {"data_seed", data_seed}};
}

json solver_json(const SolverMethod& m) {
  return {{"method", method_name(m.method)},
          {"warm_up", warm_up_name(m.warm_up)},
          {"nodes", node_space_name(m.nodes)},
          {"reuse_predicted_velocity", m.reuse_predicted_velocity}};
}

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ull;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class Build>
nn::Checkpoint cached(const json& key, const std::string& cache_dir, bool* hit, Build build) {
  if (hit) *hit = false;
  if (cache_dir.empty()) return build();
  const std::string text = key.dump();
  const fs::path base = fs::path(cache_dir) / fnv1a_hex(text);
  const fs::path ck_path = base.string() + ".ckpt.json", key_path = base.string() + ".key.json";
  if (fs::exists(ck_path) && fs::exists(key_path) && slurp(key_path) == text) {
    try {
      auto ck = nn::load_checkpoint(ck_path.string());
      if (hit) *hit = true;
      return ck;
    } catch (const nn::CheckpointError&) {
      // fall through and rebuild
    }
  }
  auto ck = build();
  fs::create_directories(cache_dir);
  const fs::path tmp = base.string() + ".tmp";
  nn::save_checkpoint(ck, tmp.string());
  fs::rename(tmp, ck_path);
  std::ofstream(key_path, std::ios::binary) << text;
  return ck;
}

}  // namespace

json train_job_to_json(const TrainJob& job) {
  json j = training_json(job.config, job.data_seed);
  j["schedule"] = schedule_to_json(job.schedule);
  j["data"] = {{"p0", mixture_to_json(job.p0)}, {"p1", mixture_to_json(job.p1)}};
  return j;
}

json reflow_job_to_json(const ReflowJob& job) {
  json j = training_json(job.config, job.data_seed);
  j.erase("loss");
  j["flow"] = transform_name(job.flow);
  j["solver"] = solver_json(job.solver);
  j["steps"] = job.steps;
  j["data"] = {{"p0", mixture_to_json(toy_p0())}, {"p1", mixture_to_json(job.p1)}};
  return j;
}

nn::Checkpoint train_cached(const TrainJob& job, const std::string& cache_dir, bool* hit) {
  return cached(json{{"train", train_job_to_json(job)}}, cache_dir, hit,
                [&] { return run_train_job(job).checkpoint; });
}

nn::Checkpoint reflow_cached(const ReflowJob& job, const TrainJob& teacher_job, double eps,
                             const std::string& cache_dir, bool* hit) {
  const json key{{"reflow", reflow_job_to_json(job)}, {"teacher", train_job_to_json(teacher_job)}, {"eps", eps}};
  return cached(key, cache_dir, hit, [&] {
    const auto teacher = train_cached(teacher_job, cache_dir);
    return run_reflow_job(job, teacher, eps).student;
  });
}

}  // namespace vfm::exp
