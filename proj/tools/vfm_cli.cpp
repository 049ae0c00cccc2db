// vfm: train, sample, reflow, convergence, metrics, experiment.
// Exit codes: 0 ok, 1 configuration or input error, 2 non-finite values.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "vfm/config_json.hpp"
#include "vfm/experiments/io.hpp"
#include "vfm/experiments/metrics.hpp"
#include "vfm/experiments/runner.hpp"
#include "vfm/experiments/training.hpp"

namespace fs = std::filesystem;
using namespace vfm;
using namespace vfm::exp;
using nlohmann::json;

namespace {

constexpr int kOk = 0, kConfigError = 1, kNonFinite = 2;

struct NonFinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void set_data(ExperimentConfig& c, const std::string& data) {
  c = [&] {
    auto j = experiment_config_to_json(c);
    j["data"] = data;
    return parse_experiment_config(j);
  }();
}

void make_parent(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

int cmd_train(const std::string& config, const std::string& out, const std::string& losses_path) {
  const auto job = parse_train_job(read_json(config));
  const auto res = run_train_job(job);
  for (double l : res.losses)
    if (!std::isfinite(l)) throw NonFinite("training loss became non-finite");
  make_parent(out);
  nn::save_checkpoint(res.checkpoint, out);
  if (!losses_path.empty()) {
    make_parent(losses_path);
    std::ofstream f(losses_path);
    f << "iteration,loss\n";
    for (std::size_t i = 0; i < res.losses.size(); ++i) f << i << ',' << format_double(res.losses[i]) << '\n';
  }
  const auto n = res.losses.size();
  const auto w = std::min<std::size_t>(200, n);
  std::printf("trained %s %s: %zu iterations, smoothed loss %s\n", schedule_name(job.schedule.kind).c_str(),
              loss_name(job.config.loss).c_str(), n, format_double(nn::smoothed_loss(res.losses, n, w)).c_str());
  return kOk;
}

struct SampleArgs {
  std::string model, schedule, flow = "sc-interp", solver = "euler", warm_up = "ab", nodes = "time", data = "toy",
              target, out;
  bool oracle = false, svg = false, reference = false;
  int steps = 5;
  std::size_t count = 2048, trajectories = 64;
  std::uint64_t seed = 0;
  double eps = 0.0;
};

int cmd_sample(const SampleArgs& a) {
  if (a.oracle == !a.model.empty()) throw ConfigError("", "give exactly one of --model and --oracle");
  json j = {{"name", "sample"},
            {"flows", {a.flow}},
            {"solvers", {{{"method", a.solver}, {"warm_up", a.warm_up}, {"nodes", a.nodes}}}},
            {"steps", {a.steps}},
            {"count", a.count},
            {"seed", a.seed},
            {"trajectories", a.trajectories},
            {"svg", a.svg},
            {"reference", a.reference},
            {"data", a.data}};
  if (a.eps > 0.0) j["eps"] = a.eps;
  if (!a.target.empty()) j["target"] = a.target;
  if (a.oracle) {
    if (a.schedule.empty()) throw ConfigError("/schedule", "--oracle needs --schedule");
    j["schedule"] = a.schedule;
    j["source"] = "oracle";
  } else {
    const auto ck = nn::load_checkpoint(a.model);
    j["schedule"] = schedule_to_json(ck.schedule);
    if (!a.schedule.empty() && parse_schedule_kind(a.schedule) != ck.schedule.kind)
      throw ConfigError("/schedule", "model was trained on " + schedule_name(ck.schedule.kind));
    j["source"] = {{"type", "model"}, {"path", fs::absolute(a.model).string()}};
  }
  const auto res = run_experiment(parse_experiment_config(j), a.out);
  for (const auto& c : res.cells) std::cout << c.dir << ' ' << c.metrics["energy_distance"].dump() << '\n';
  if (!res.all_finite) throw NonFinite("non-finite samples");
  return kOk;
}

int cmd_reflow(const std::string& teacher_path, const std::string& config, const std::string& out, double eps) {
  const auto job = parse_reflow_job(read_json(config));
  const auto teacher = nn::load_checkpoint(teacher_path);
  const auto res = run_reflow_job(job, teacher, eps > 0.0 ? eps : default_eps(teacher.kind));
  for (double l : res.losses)
    if (!std::isfinite(l)) throw NonFinite("training loss became non-finite");
  make_parent(out);
  nn::save_checkpoint(res.student, out);
  std::printf("reflowed %s teacher into a rectified velocity model\n", schedule_name(teacher.schedule.kind).c_str());
  return kOk;
}

int cmd_convergence(const std::string& schedule, const std::string& out, const std::string& flow,
                    const std::string& reference_flow, const std::string& data, std::size_t count, std::uint64_t seed) {
  ConvergenceOptions o;
  o.schedule = [&] {
    try {
      return schedule_from_json(schedule);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("/schedule", e.what());
    }
  }();
  ExperimentConfig d;
  set_data(d, data);
  o.p0 = d.p0;
  o.p1 = d.p1;
  o.flow = parse_transform_kind(flow);
  o.reference_flow = parse_transform_kind(reference_flow);
  o.count = count;
  o.seed = seed;
  const auto rows = convergence_study(o);
  fs::create_directories(out);
  write_json((fs::path(out) / "convergence.json").string(), convergence_to_json(o, rows));
  std::ofstream f(fs::path(out) / "convergence.csv");
  f << "solver,steps,nfe,rmse\n";
  bool finite = true;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.steps.size(); ++i) {
      f << solver_label(r.method) << ',' << r.steps[i] << ',' << r.nfe[i] << ',' << format_double(r.rmse[i]) << '\n';
      finite = finite && std::isfinite(r.rmse[i]);
    }
    std::printf("%-14s order %s\n", solver_label(r.method).c_str(), format_double(r.order).c_str());
  }
  if (!finite) throw NonFinite("non-finite errors");
  return kOk;
}

int cmd_metrics(const std::string& a_path, const std::string& b_path, std::size_t points, std::uint64_t seed) {
  const Batch a = read_samples_csv(a_path), b = read_samples_csv(b_path);
  if (a.cols() != b.cols()) throw ConfigError("", "sample files differ in dimension");
  if (!a.allFinite() || !b.allFinite()) throw NonFinite("non-finite samples");
  json j = {{"count_a", a.rows()},
            {"count_b", b.rows()},
            {"energy_distance", energy_distance(a, b, {points, seed})},
            {"trajectory_rmse", nullptr}};
  if (a.rows() == b.rows()) j["trajectory_rmse"] = trajectory_rmse(a, b);
  std::cout << j.dump(2) << '\n';
  return kOk;
}

int cmd_experiment(const std::string& config, const std::string& out) {
  const auto res = run_experiment(load_experiment_config(config), out);
  for (const auto& c : res.cells) std::cout << c.dir << ' ' << c.metrics["energy_distance"].dump() << '\n';
  if (!res.all_finite) throw NonFinite("non-finite samples");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Velocity-field flows: training, sampling and toy experiments"};
  app.require_subcommand(1);

  std::string config, out, losses;
  auto* train = app.add_subcommand("train", "Train a velocity or noise model");
  train->add_option("--config", config, "Training config (JSON)")->required();
  train->add_option("--out", out, "Checkpoint to write")->required();
  train->add_option("--losses", losses, "Optional per-iteration loss CSV");

  SampleArgs s;
  auto* sample = app.add_subcommand("sample", "Integrate a flow from p1 samples and write data files");
  auto* model_opt = sample->add_option("--model", s.model, "Checkpoint");
  auto* oracle_opt = sample->add_flag("--oracle", s.oracle, "Use the exact mixture velocity");
  model_opt->excludes(oracle_opt);
  sample->add_option("--schedule", s.schedule, "Schedule id");
  sample->add_option("--flow", s.flow, "posterior, sn-interp, sn-scale, sc-interp, sc-scale, sc-interp-shift, sc-scale-shift");
  sample->add_option("--solver", s.solver, "euler, midpoint, heun, rk3, rk4, ab2, ab3, ab1am2, ab2am2, ab2am3, ab3am3");
  sample->add_option("--warm-up", s.warm_up, "Multistep warm-up: ab, heun, rk3");
  sample->add_option("--nodes", s.nodes, "Stage placement: time or clock");
  sample->add_option("--steps", s.steps, "Number of steps")->check(CLI::PositiveNumber);
  sample->add_option("--count", s.count, "Number of samples")->check(CLI::PositiveNumber);
  sample->add_option("--seed", s.seed, "Seed");
  sample->add_option("--eps", s.eps, "Denominator clip (default by model kind)");
  sample->add_option("--data", s.data, "Endpoint mixtures: toy or gaussian");
  sample->add_option("--trajectories", s.trajectories, "Trajectories written to CSV");
  sample->add_option("--target", s.target, "Map SC states into this schedule's process");
  sample->add_flag("--svg", s.svg, "Also write an SVG scatter");
  sample->add_flag("--reference", s.reference, "Report RMSE against the rk4 N=4096 oracle posterior flow");
  sample->add_option("--out", s.out, "Output directory")->required();

  std::string teacher;
  double reflow_eps = 0.0;
  auto* reflow = app.add_subcommand("reflow", "Retrain on the deterministic coupling of a teacher flow");
  reflow->add_option("--teacher", teacher, "Teacher checkpoint")->required();
  reflow->add_option("--config", config, "Reflow config (JSON)")->required();
  reflow->add_option("--out", out, "Student checkpoint to write")->required();
  reflow->add_option("--eps", reflow_eps, "Denominator clip for the teacher flow");

  std::string schedule, flow = "sc-interp", reference_flow = "posterior", data = "gaussian";
  bool oracle = false;
  std::size_t count = 256;
  std::uint64_t seed = 0;
  auto* conv = app.add_subcommand("convergence", "Empirical convergence orders on the exact velocity");
  conv->add_flag("--oracle", oracle, "Use the exact mixture velocity (the only supported source)")->required();
  conv->add_option("--schedule", schedule, "Schedule id")->required();
  conv->add_option("--flow", flow, "Flow to integrate");
  conv->add_option("--reference-flow", reference_flow, "Flow of the rk4 N=4096 reference");
  conv->add_option("--data", data, "Endpoint mixtures: gaussian or toy");
  conv->add_option("--count", count, "Number of trajectories")->check(CLI::PositiveNumber);
  conv->add_option("--seed", seed, "Seed");
  conv->add_option("--out", out, "Output directory")->required();

  std::string a_path, b_path;
  std::size_t points = 0;
  auto* metrics = app.add_subcommand("metrics", "Compare two sample CSV files");
  metrics->add_option("--a", a_path, "Samples CSV")->required();
  metrics->add_option("--b", b_path, "Samples CSV")->required();
  metrics->add_option("--energy-points", points, "Subsample size for the energy distance (0 keeps all)");
  metrics->add_option("--seed", seed, "Subsample seed");

  auto* experiment = app.add_subcommand("experiment", "Run every cell of an experiment config");
  experiment->add_option("--config", config, "Experiment config (JSON)")->required();
  experiment->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (train->parsed()) return cmd_train(config, out, losses);
    if (sample->parsed()) return cmd_sample(s);
    if (reflow->parsed()) return cmd_reflow(teacher, config, out, reflow_eps);
    if (conv->parsed()) return cmd_convergence(schedule, out, flow, reference_flow, data, count, seed);
    if (metrics->parsed()) return cmd_metrics(a_path, b_path, points, seed);
    if (experiment->parsed()) return cmd_experiment(config, out);
  } catch (const NonFinite& e) {
    std::cerr << "vfm: numeric failure: " << e.what() << '\n';
    return kNonFinite;
  } catch (const std::exception& e) {
    std::cerr << "vfm: error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}
