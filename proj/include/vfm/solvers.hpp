#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vfm/transforms.hpp"
#include "vfm/types.hpp"

namespace vfm {

struct TimeGrid {
  std::vector<double> points;  // strictly decreasing in sampling order
  std::size_t steps() const { return points.empty() ? 0 : points.size() - 1; }
};

TimeGrid time_grid(int n_steps, double t_start = 1.0, double t_end = 0.0);

enum class Method { euler, midpoint, heun, rk3, rk4, ab2, ab3, ab1am2, ab2am2, ab2am3, ab3am3 };
enum class WarmUp { increasing_order_ab, heun, rk3 };
// Where RK stage times and multistep interpolation nodes are placed.
// `time`: stage at t_i + c*dt, stage increment clock(stage) - clock(t_i),
// multistep weights from the t grid. `clock`: stage at clock_i + c*dclock
// (time found by inverting the clock), weights from clock values. The two
// coincide unless the kind is time-adjusted; only `clock` keeps the full
// order of RK3/RK4/AB3 when the clock is curved.
enum class NodeSpace { time, clock };

struct SolverMethod {
  Method method = Method::euler;
  WarmUp warm_up = WarmUp::increasing_order_ab;
  bool reuse_predicted_velocity = true;
  NodeSpace nodes = NodeSpace::time;
};

Method parse_method(std::string_view name);
std::string method_name(Method m);
WarmUp parse_warm_up(std::string_view name);  // "ab", "heun", "rk3"
std::string warm_up_name(WarmUp w);
NodeSpace parse_node_space(std::string_view name);  // "time", "clock"
std::string node_space_name(NodeSpace n);
bool is_runge_kutta(Method m);
bool is_predictor_corrector(Method m);

struct Tableau {
  std::vector<double> c;
  std::vector<std::vector<double>> a;  // strictly lower triangular, a[k][j] for j < k
  std::vector<double> b;
  // Throws std::invalid_argument unless sum(b) = 1 and row sums of a equal c.
  void validate() const;
};

// euler, midpoint, heun, rk3, rk4.
Tableau tableau_for(Method m);

// times = {t_{i+1}, t_i, t_{i-1}[, t_{i-2}]}. Returns the weights of
// v_{t_i}, v_{t_{i-1}}[, v_{t_{i-2}}]. A single time pair gives {1}.
std::vector<double> ab_coefficients(std::span<const double> times);
// times = {t_{i+1}, t_i[, t_{i-1}]}. Returns the weights of
// v_{t_{i+1}}, v_{t_i}[, v_{t_{i-1}}].
std::vector<double> am_coefficients(std::span<const double> times);

// Single steps on a batch of frame states. For shift kinds `dir` is the
// direction the state was built with; the step rebuilds the frame state with
// the velocity at its start, recovers every stage with that direction, and
// writes it back to `dir` for recovering the result.
Batch euler_step(const TransformedField& field, const Batch& xbar, double t, double t_next, Batch* dir = nullptr);
Batch rk_step(const TransformedField& field, const Batch& xbar, double t, double t_next, const Tableau& tableau,
              Batch* dir = nullptr, NodeSpace nodes = NodeSpace::time);

struct RecordDiagnostics {
  double max_abs_x = 0.0;
  double max_abs_xbar = 0.0;
  double max_abs_v = 0.0;
  double delta_phi = 0.0;
};

struct TrajectoryRecord {
  double t = 0.0;
  std::size_t nfe_so_far = 0;
  Vec x;
  Vec xbar;
  RecordDiagnostics diagnostics;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  std::size_t nfe = 0;
};

// Passed to RunOptions::on_record after every step and for the initial state.
struct RecordView {
  std::size_t step = 0;  // 0 for the initial state
  double t = 0.0;
  double clock = 0.0;
  const Batch& x;
  const Batch& xbar;
  const Batch& direction;  // latest frame velocity; empty before the first step
  const Batch* used = nullptr;  // velocity the step applied; null for the initial state
  double delta_phi = 0.0;       // clock increment of the step
  std::size_t nfe_so_far = 0;
};

struct RunOptions {
  bool keep_all_records = true;  // false keeps only the first and last
  std::function<void(const RecordView&)> on_record;
};

// Lockstep integration of a batch; rows never interact.
struct RunResult {
  std::vector<double> times;
  std::vector<std::size_t> nfe_so_far;
  std::vector<std::size_t> steps;  // grid step index per kept record
  std::vector<Batch> x;
  std::vector<Batch> xbar;
  // [record][trajectory]
  std::vector<std::vector<RecordDiagnostics>> diagnostics;
  std::size_t nfe = 0;

  const Batch& final_x() const { return x.back(); }
  std::size_t count() const { return x.empty() ? 0 : static_cast<std::size_t>(x.front().rows()); }
  Trajectory trajectory(std::size_t i) const;
  std::vector<Trajectory> trajectories() const;
};

RunResult run(const TransformedField& field, const TimeGrid& grid, const SolverMethod& method,
              const Batch& x_init, const RunOptions& options = {});

}  // namespace vfm
