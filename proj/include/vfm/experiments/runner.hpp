#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "vfm/experiments/dataset.hpp"
#include "vfm/experiments/io.hpp"
#include "vfm/gmm.hpp"
#include "vfm/solvers.hpp"
#include "vfm/transforms.hpp"
#include "vfm/velocity.hpp"

namespace vfm::exp {

enum class SourceType { oracle, model, constant };

struct SourceSpec {
  SourceType type = SourceType::oracle;
  FieldKind output = FieldKind::oracle;  // what the oracle reports
  std::string model_path;
  Vec velocity;  // constant field
};

struct ExperimentConfig {
  std::string name = "experiment";
  ScheduleId schedule{ScheduleKind::third_degree};
  SourceSpec source;
  GaussianMixture p0 = toy_p0();
  GaussianMixture p1 = toy_p1();
  std::vector<TransformKind> flows{TransformKind::posterior};
  std::vector<SolverMethod> solvers{SolverMethod{}};
  std::vector<int> steps{1, 2, 3, 5, 10, 20, 50};
  std::size_t count = 2048;
  std::uint64_t seed = 0;
  std::optional<double> eps;      // defaults by source kind
  std::size_t trajectories = 64;  // rows written to the trajectory CSV
  std::size_t energy_points = 2048;
  bool reference = false;  // trajectory_rmse against rk4 N=4096 on the oracle posterior flow
  bool svg = false;
  // Flow-to-flow: SC states are mapped into this process at every record.
  std::optional<ScheduleId> target;
};

ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);
nlohmann::json experiment_config_to_json(const ExperimentConfig& c);

// Loads or builds the velocity source. Model checkpoints must match the
// configured schedule.
std::shared_ptr<const VelocitySource> make_source(const ExperimentConfig& c);
double effective_eps(const ExperimentConfig& c, const VelocitySource& src);

// Seed of an independent stream for one use of an experiment seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Per-record maxima over the batch.
struct Tracker {
  std::vector<double> t;
  std::vector<double> max_abs_x;
  std::vector<double> mean_max_abs_x;  // mean over samples of max_k |x_k|
  std::vector<double> max_abs_xbar;
  std::vector<double> max_abs_v;
  std::vector<double> max_abs_increment;  // |delta_phi * v|
  std::vector<double> delta_phi;
};

struct SampleResult {
  Batch final_x;
  std::size_t nfe = 0;
  Tracker tracker;
  std::vector<TrajectoryRow> rows;  // the first `keep` trajectories, every record
  bool finite = true;
};

// Integrates x1 to t = 0 without keeping whole batches per record. With a
// target schedule the field must be an SC kind and every state is mapped
// into the target process.
SampleResult sample_flow(const TransformedField& field, const TimeGrid& grid, const SolverMethod& method,
                         const Batch& x1, std::size_t keep = 0, const std::optional<ScheduleId>& target = {});

struct PathStraightness {
  std::optional<double> x;      // median over kept trajectories
  std::optional<double> frame;  // same for the frame states
};
PathStraightness path_straightness(const std::vector<TrajectoryRow>& rows);

struct CellResult {
  TransformKind flow = TransformKind::posterior;
  SolverMethod solver;
  int steps = 0;
  std::string dir;
  nlohmann::json metrics;
  bool finite = true;
};

struct ExperimentResult {
  std::vector<CellResult> cells;
  double energy_baseline = 0.0;
  bool all_finite = true;
};

// Writes <out>/<cell>/{trajectories.csv, samples.csv, metrics.json[, plot.svg]}
// for every flow x solver x steps cell, then <out>/manifest.json.
ExperimentResult run_experiment(const ExperimentConfig& c, const std::string& out_dir);

struct ConvergenceOptions {
  ScheduleId schedule{ScheduleKind::third_degree};
  GaussianMixture p0 = gaussian_p0();
  GaussianMixture p1 = gaussian_p1();
  TransformKind flow = TransformKind::sc_interp_time_adjust;
  TransformKind reference_flow = TransformKind::posterior;
  int reference_steps = 4096;
  std::vector<SolverMethod> methods;  // empty: euler, heun, ab2, rk3, ab3 (Heun warm-up), rk4
  std::vector<int> steps{10, 20, 40, 80, 160, 320};
  std::size_t count = 256;
  std::uint64_t seed = 0;
  double eps = 1e-6;
};

struct ConvergenceRow {
  SolverMethod method;
  std::vector<int> steps;
  std::vector<double> rmse;
  std::vector<std::size_t> nfe;
  double order = 0.0;  // least-squares slope of -log(rmse) against log(N)
};

std::vector<ConvergenceRow> convergence_study(const ConvergenceOptions& opts);
nlohmann::json convergence_to_json(const ConvergenceOptions& opts, const std::vector<ConvergenceRow>& rows);

double fit_order(const std::vector<int>& steps, const std::vector<double>& errors);

std::string solver_label(const SolverMethod& m);

}  // namespace vfm::exp
