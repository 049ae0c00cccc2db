#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "vfm/experiments/dataset.hpp"
#include "vfm/nn/checkpoint.hpp"
#include "vfm/nn/train.hpp"
#include "vfm/solvers.hpp"

namespace vfm::exp {

std::string loss_name(nn::LossKind k);
nn::LossKind parse_loss(std::string_view name);  // "velocity_matching", "noise_matching"

struct TrainJob {
  ScheduleId schedule{ScheduleKind::third_degree};
  nn::TrainConfig config;
  GaussianMixture p0 = toy_p0();
  GaussianMixture p1 = toy_p1();
  std::uint64_t data_seed = 0;
};

// {"schedule", "loss", "iterations", "batch", "lr", "n_data", "seed",
//  "data": "toy" | "gaussian" | {"p0", "p1"}, "data_seed"}
TrainJob parse_train_job(const nlohmann::json& j);

struct TrainOutcome {
  nn::Checkpoint checkpoint;
  std::vector<double> losses;
};

TrainOutcome run_train_job(const TrainJob& job);

struct ReflowJob {
  nn::TrainConfig config;  // for the student; coupling pairs = n_data
  TransformKind flow = TransformKind::sc_interp_time_adjust;
  SolverMethod solver;
  int steps = 100;
  GaussianMixture p1 = toy_p1();
  std::uint64_t data_seed = 0;
};

// Training keys as above (schedule and loss excluded) plus "flow", "solver",
// "steps" for the teacher integration.
ReflowJob parse_reflow_job(const nlohmann::json& j);

struct ReflowOutcome {
  nn::Checkpoint student;  // rectified schedule, velocity model
  std::vector<double> losses;
};

ReflowOutcome run_reflow_job(const ReflowJob& job, const nn::Checkpoint& teacher, double eps);

}  // namespace vfm::exp
