#pragma once

#include <optional>
#include <vector>

#include "vfm/experiments/runner.hpp"
#include "vfm/nn/checkpoint.hpp"

// Measurements on trained toy models shared by the acceptance run and the
// calibration tool.
namespace vfm::exp {

struct EvalSet {
  Batch x1;    // starting noise
  Batch ref;   // p0 draw the samples are compared with
  Batch ref2;  // second p0 draw for the baseline
};
EvalSet default_eval_set(std::size_t n = 2048);

// Median over marginal samples at t of |v_model - v_exact| / |v_exact|.
double velocity_error(const nn::Checkpoint& ck, double t);

// Euler samples of a checkpoint's flow from ev.x1; optionally mapped into
// another process.
SampleResult sample_checkpoint(const nn::Checkpoint& ck, TransformKind flow, int steps, double eps, const Batch& x1,
                               std::size_t keep = 0, const std::optional<ScheduleId>& target = {});

// Energy distance to ev.ref, infinite when any sample is non-finite.
double energy_to_ref(const SampleResult& s, const EvalSet& ev);

struct FewStepMeasure {
  double sc = 0.0;         // SC Euler at sc_steps
  double posterior = 0.0;  // posterior Euler at posterior_steps
};
FewStepMeasure few_step(const nn::Checkpoint& ck, const EvalSet& ev, double eps, int sc_steps = 5,
                        int posterior_steps = 20);

struct ReflowMeasure {
  double pre = 0.0;      // teacher SC Euler N=50
  double post_one = 0.0; // student SC Euler N=1
  double post = 0.0;     // student SC Euler N=50
  PathStraightness pre_paths, post_paths;  // 256 trajectories, N=50
};
ReflowMeasure reflow_measure(const nn::Checkpoint& teacher, const nn::Checkpoint& student, const EvalSet& ev,
                             double eps);

// NaN-propagating maximum of a tracker series.
double overall_max(const std::vector<double>& v);

// Max SC velocity over steps starting within 0.01 of either end over the
// median over steps starting in [0.25, 0.75].
double end_blowup(const Tracker& tr);

}  // namespace vfm::exp
