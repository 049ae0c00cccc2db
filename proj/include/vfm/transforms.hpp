#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "vfm/schedules.hpp"
#include "vfm/types.hpp"
#include "vfm/velocity.hpp"

namespace vfm {

enum class TransformKind {
  posterior,
  sn_interp,
  sn_scale,
  sc_interp_time_adjust,
  sc_scale_time_adjust,
  sc_interp_shift,
  sc_scale_shift,
};

// "posterior", "sn-interp", "sn-scale", "sc-interp", "sc-scale",
// "sc-interp-shift", "sc-scale-shift".
TransformKind parse_transform_kind(std::string_view name);
std::string transform_name(TransformKind kind);

bool is_shift(TransformKind kind);
bool is_time_adjust(TransformKind kind);
bool is_sc(TransformKind kind);
// Empty for posterior.
std::optional<PhiForm> form_of(TransformKind kind);
Frame frame_of(TransformKind kind);

// SN-frame and SC-frame velocities given either a posterior velocity v or a
// noise estimate x1 at the original-frame sample x.
Batch sn_velocity_from_v(const ScheduleValues& sv, const Batch& x, const Batch& v, PhiForm form, double eps);
Batch sn_velocity_from_x1(const ScheduleValues& sv, const Batch& x, const Batch& x1, PhiForm form, double eps);
Batch sc_velocity_from_v(const ScheduleValues& sv, const Batch& x, const Batch& v, PhiForm form, double eps);
Batch sc_velocity_from_x1(const ScheduleValues& sv, const Batch& x, const Batch& x1, PhiForm form, double eps);

Vec scaled_process_velocity(double k, double k_dot, const Vec& x, const Vec& v);

class TransformedField {
 public:
  TransformedField(std::shared_ptr<const VelocitySource> base, ScheduleId schedule,
                   TransformKind kind, double eps);

  const VelocitySource& base() const { return *base_; }
  std::shared_ptr<const VelocitySource> base_ptr() const { return base_; }
  const ScheduleId& schedule() const { return schedule_; }
  TransformKind kind() const { return kind_; }
  double eps() const { return eps_; }
  std::size_t dim() const { return base_->dim(); }

  // Queries the base once at the original-frame samples x and converts the
  // output into this kind's frame velocity.
  Batch velocity(const Batch& x, double t) const;
  Batch velocity_from_output(const Batch& x, const Batch& out, const ScheduleValues& sv) const;

  // Integration clock: phi_t for time-adjusted SC kinds, t otherwise.
  double clock(double t) const;
  double increment(double t, double t_next) const { return clock(t_next) - clock(t); }
  // Time in [min(t_a, t_b), max(t_a, t_b)] whose clock equals `target`, by
  // bisection. The clock must be monotone on the bracket.
  double time_at_clock(double target, double t_a, double t_b) const;

  // `dir` is the shift direction and is only read by shift kinds.
  Batch to_frame(const Batch& x, double t, const Batch* dir) const;
  Batch from_frame(const Batch& xbar, double t, const Batch* dir) const;

  // Clipped frame scale (a + sigma or a); 1 for the posterior kind.
  double denominator(const ScheduleValues& sv) const;

 private:
  double shift_offset(const ScheduleValues& sv) const;

  std::shared_ptr<const VelocitySource> base_;
  ScheduleId schedule_;
  TransformKind kind_;
  double eps_;
};

FlowState to_transformed(const FlowState& x, const TransformedField& field, const Vec* dir = nullptr);
FlowState from_transformed(const FlowState& xbar, const TransformedField& field, const Vec* dir = nullptr);
Vec transformed_velocity(const TransformedField& field, const FlowState& x);

struct TargetSchedulePair {
  ScheduleId source;
  ScheduleId target;
};

Vec flow_to_flow_map(const TargetSchedulePair& pair, const Vec& x, double t, const Vec& x1_est, double eps);
Batch flow_to_flow_map(const TargetSchedulePair& pair, const Batch& x, double t, const Batch& x1_est, double eps);

// Maps an SC-frame sample to the target process. `sc_clock` is the SC
// process time of xbar: t' for shift frames (default), phi_t' for
// time-adjusted frames.
Vec sc_to_target(const TargetSchedulePair& pair, const Vec& xbar, double t_prime, const Vec& sc_velocity,
                 PhiForm form, double eps, std::optional<double> sc_clock = std::nullopt);
Batch sc_to_target(const TargetSchedulePair& pair, const Batch& xbar, double t_prime, const Batch& sc_velocity,
                   PhiForm form, double eps, std::optional<double> sc_clock = std::nullopt);

Vec ddim_step(const ScheduleValues& sv, const ScheduleValues& sv_next, const Vec& x, const Vec& x1_est, double eps);
Batch ddim_step(const ScheduleValues& sv, const ScheduleValues& sv_next, const Batch& x, const Batch& x1_est, double eps);

}  // namespace vfm
