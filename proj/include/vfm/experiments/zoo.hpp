#pragma once

#include <string>

#include "json.hpp"

#include "vfm/experiments/training.hpp"

namespace vfm::exp {

// Training budget for the toy-scale checks. Smaller than the train defaults
// (20000 x 2048); see the calibration tool for the measurements behind it.
inline constexpr int kZooIterations = 10000;
inline constexpr int kZooBatch = 1024;

TrainJob zoo_train_job(ScheduleKind schedule, nn::LossKind loss);
ReflowJob zoo_reflow_job();

nlohmann::json train_job_to_json(const TrainJob& job);
nlohmann::json reflow_job_to_json(const ReflowJob& job);

// Trains, or loads a checkpoint cached under cache_dir by the job's JSON.
// An empty cache_dir disables caching. *hit reports a cache load.
nn::Checkpoint train_cached(const TrainJob& job, const std::string& cache_dir, bool* hit = nullptr);
nn::Checkpoint reflow_cached(const ReflowJob& job, const TrainJob& teacher_job, double eps,
                             const std::string& cache_dir, bool* hit = nullptr);

}  // namespace vfm::exp
