#include "vfm/transforms.hpp"

#include <algorithm>
#include <stdexcept>

namespace vfm {

namespace {

double den_of(const ScheduleValues& sv, PhiForm form) {
  return form == PhiForm::interp ? sv.a + sv.sigma : sv.a;
}
double den_dot_of(const ScheduleValues& sv, PhiForm form) {
  return form == PhiForm::interp ? sv.a_dot + sv.sigma_dot : sv.a_dot;
}

}  // namespace

TransformKind parse_transform_kind(std::string_view name) {
  if (name == "posterior") return TransformKind::posterior;
  if (name == "sn-interp") return TransformKind::sn_interp;
  if (name == "sn-scale") return TransformKind::sn_scale;
  if (name == "sc-interp") return TransformKind::sc_interp_time_adjust;
  if (name == "sc-scale") return TransformKind::sc_scale_time_adjust;
  if (name == "sc-interp-shift") return TransformKind::sc_interp_shift;
  if (name == "sc-scale-shift") return TransformKind::sc_scale_shift;
  throw std::invalid_argument("unknown flow '" + std::string(name) + "'");
}

std::string transform_name(TransformKind kind) {
  switch (kind) {
    case TransformKind::posterior: return "posterior";
    case TransformKind::sn_interp: return "sn-interp";
    case TransformKind::sn_scale: return "sn-scale";
    case TransformKind::sc_interp_time_adjust: return "sc-interp";
    case TransformKind::sc_scale_time_adjust: return "sc-scale";
    case TransformKind::sc_interp_shift: return "sc-interp-shift";
    case TransformKind::sc_scale_shift: return "sc-scale-shift";
  }
  return "?";
}

bool is_shift(TransformKind k) {
  return k == TransformKind::sc_interp_shift || k == TransformKind::sc_scale_shift;
}

bool is_time_adjust(TransformKind k) {
  return k == TransformKind::sc_interp_time_adjust || k == TransformKind::sc_scale_time_adjust;
}

bool is_sc(TransformKind k) { return is_shift(k) || is_time_adjust(k); }

std::optional<PhiForm> form_of(TransformKind k) {
  switch (k) {
    case TransformKind::posterior: return std::nullopt;
    case TransformKind::sn_interp:
    case TransformKind::sc_interp_time_adjust:
    case TransformKind::sc_interp_shift: return PhiForm::interp;
    default: return PhiForm::scale;
  }
}

Frame frame_of(TransformKind k) {
  if (k == TransformKind::posterior) return Frame::original;
  if (k == TransformKind::sn_interp) return Frame::sn_interp;
  if (k == TransformKind::sn_scale) return Frame::sn_scale;
  return Frame::sc;
}

Batch sn_velocity_from_v(const ScheduleValues& sv, const Batch& x, const Batch& v, PhiForm form, double eps) {
  const double den = clip_denominator(den_of(sv, form), eps);
  return (den_of(sv, form) * v - den_dot_of(sv, form) * x) / (den * den);
}

Batch sn_velocity_from_x1(const ScheduleValues& sv, const Batch& x, const Batch& x1, PhiForm form, double eps) {
  const double phi_dot = phi(sv, form, eps).phi_dot;
  if (form == PhiForm::scale) return phi_dot * x1;
  return phi_dot * ((sv.a + sv.sigma) * x1 - x) / clip_denominator(sv.a, eps);
}

Batch sc_velocity_from_v(const ScheduleValues& sv, const Batch& x, const Batch& v, PhiForm form, double eps) {
  return (den_of(sv, form) * v - den_dot_of(sv, form) * x) / clip_denominator(cross_term(sv), eps);
}

Batch sc_velocity_from_x1(const ScheduleValues& sv, const Batch& x, const Batch& x1, PhiForm form, double eps) {
  if (form == PhiForm::scale) return x1;
  return ((sv.a + sv.sigma) * x1 - x) / clip_denominator(sv.a, eps);
}

Vec scaled_process_velocity(double k, double k_dot, const Vec& x, const Vec& v) {
  return k_dot * x + k * v;
}

TransformedField::TransformedField(std::shared_ptr<const VelocitySource> base, ScheduleId schedule,
                                   TransformKind kind, double eps)
    : base_(std::move(base)), schedule_(schedule), kind_(kind), eps_(eps) {
  if (!base_) throw std::invalid_argument("TransformedField: null base");
  if (!(eps > 0.0)) throw std::invalid_argument("TransformedField: eps must be positive");
}

Batch TransformedField::velocity(const Batch& x, double t) const {
  return velocity_from_output(x, base_->evaluate(x, t), eval_schedule(schedule_, t));
}

Batch TransformedField::velocity_from_output(const Batch& x, const Batch& out, const ScheduleValues& sv) const {
  const auto kind = base_->kind();
  const bool noise = kind == FieldKind::noise_model;
  Batch v;
  if (kind == FieldKind::data_model) {
    complete_state(sv, x, Known::x0, out, eps_, &v, nullptr, nullptr);
  } else if (!noise) {
    v = out;
  }
  if (kind_ == TransformKind::posterior) {
    if (noise) complete_state(sv, x, Known::x1, out, eps_, &v, nullptr, nullptr);
    return v;
  }
  const PhiForm form = *form_of(kind_);
  if (kind_ == TransformKind::sn_interp || kind_ == TransformKind::sn_scale)
    return noise ? sn_velocity_from_x1(sv, x, out, form, eps_) : sn_velocity_from_v(sv, x, v, form, eps_);
  return noise ? sc_velocity_from_x1(sv, x, out, form, eps_) : sc_velocity_from_v(sv, x, v, form, eps_);
}

double TransformedField::clock(double t) const {
  if (!is_time_adjust(kind_)) return t;
  return phi(eval_schedule(schedule_, t), *form_of(kind_), eps_).phi;
}

double TransformedField::time_at_clock(double target, double t_a, double t_b) const {
  if (!is_time_adjust(kind_)) return target;
  double lo = std::min(t_a, t_b), hi = std::max(t_a, t_b);
  const bool rising = clock(hi) >= clock(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((clock(mid) < target) == rising) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double TransformedField::denominator(const ScheduleValues& sv) const {
  const auto form = form_of(kind_);
  return form ? clip_denominator(den_of(sv, *form), eps_) : 1.0;
}

double TransformedField::shift_offset(const ScheduleValues& sv) const {
  return sv.t - phi(sv, *form_of(kind_), eps_).phi;
}

Batch TransformedField::to_frame(const Batch& x, double t, const Batch* dir) const {
  if (kind_ == TransformKind::posterior) return x;
  const auto sv = eval_schedule(schedule_, t);
  Batch out = x / denominator(sv);
  if (is_shift(kind_)) {
    if (!dir) throw std::invalid_argument("to_frame: shift kinds need a direction");
    out += shift_offset(sv) * *dir;
  }
  return out;
}

Batch TransformedField::from_frame(const Batch& xbar, double t, const Batch* dir) const {
  if (kind_ == TransformKind::posterior) return xbar;
  const auto sv = eval_schedule(schedule_, t);
  if (is_shift(kind_)) {
    if (!dir) throw std::invalid_argument("from_frame: shift kinds need a direction");
    return denominator(sv) * (xbar - shift_offset(sv) * *dir);
  }
  return denominator(sv) * xbar;
}

FlowState to_transformed(const FlowState& x, const TransformedField& field, const Vec* dir) {
  if (x.frame != Frame::original) throw std::invalid_argument("to_transformed: state not in original frame");
  Batch d;
  if (dir) d = dir->transpose();
  const Batch out = field.to_frame(x.x.transpose(), x.t, dir ? &d : nullptr);
  return {out.row(0).transpose(), x.t, frame_of(field.kind())};
}

FlowState from_transformed(const FlowState& xbar, const TransformedField& field, const Vec* dir) {
  Batch d;
  if (dir) d = dir->transpose();
  const Batch out = field.from_frame(xbar.x.transpose(), xbar.t, dir ? &d : nullptr);
  return {out.row(0).transpose(), xbar.t, Frame::original};
}

Vec transformed_velocity(const TransformedField& field, const FlowState& x) {
  if (x.frame != Frame::original) throw std::invalid_argument("transformed_velocity: needs an original-frame sample");
  return field.velocity(x.x.transpose(), x.t).row(0).transpose();
}

Batch flow_to_flow_map(const TargetSchedulePair& pair, const Batch& x, double t, const Batch& x1_est, double eps) {
  const auto s = eval_schedule(pair.source, t);
  const auto g = eval_schedule(pair.target, t);
  const double ratio = g.a / clip_denominator(s.a, eps);
  return ratio * x + (g.sigma - s.sigma * ratio) * x1_est;
}

Vec flow_to_flow_map(const TargetSchedulePair& pair, const Vec& x, double t, const Vec& x1_est, double eps) {
  return flow_to_flow_map(pair, Batch(x.transpose()), t, Batch(x1_est.transpose()), eps).row(0).transpose();
}

Batch sc_to_target(const TargetSchedulePair& pair, const Batch& xbar, double t_prime, const Batch& sc_velocity,
                   PhiForm form, double eps, std::optional<double> sc_clock) {
  const auto g = eval_schedule(pair.target, t_prime);
  const double k = clip_denominator(form == PhiForm::interp ? g.a + g.sigma : g.a, eps);
  const double clock = sc_clock.value_or(t_prime);
  return k * (xbar - (clock - g.sigma / k) * sc_velocity);
}

Vec sc_to_target(const TargetSchedulePair& pair, const Vec& xbar, double t_prime, const Vec& sc_velocity,
                 PhiForm form, double eps, std::optional<double> sc_clock) {
  return sc_to_target(pair, Batch(xbar.transpose()), t_prime, Batch(sc_velocity.transpose()), form, eps, sc_clock)
      .row(0)
      .transpose();
}

Batch ddim_step(const ScheduleValues& sv, const ScheduleValues& sv_next, const Batch& x, const Batch& x1_est,
                double eps) {
  return sv_next.a * x0_given_x1(sv, x, x1_est, eps) + sv_next.sigma * x1_est;
}

Vec ddim_step(const ScheduleValues& sv, const ScheduleValues& sv_next, const Vec& x, const Vec& x1_est, double eps) {
  return sv_next.a * x0_given_x1(sv, x, x1_est, eps) + sv_next.sigma * x1_est;
}

}  // namespace vfm
