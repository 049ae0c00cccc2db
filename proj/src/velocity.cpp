#include "vfm/velocity.hpp"

#include <stdexcept>

namespace vfm {

namespace {

Batch as_row(const Vec& v) { return v.transpose(); }
Vec first_row(const Batch& b) { return b.row(0).transpose(); }

}  // namespace

Vec target_velocity(const ScheduleValues& sv, const Vec& x0, const Vec& x1) {
  return sv.a_dot * x0 + sv.sigma_dot * x1;
}

Batch target_velocity(const ScheduleValues& sv, const Batch& x0, const Batch& x1) {
  return sv.a_dot * x0 + sv.sigma_dot * x1;
}

void complete_state(const ScheduleValues& sv, const Batch& x, Known known, const Batch& value,
                    double eps, Batch* v, Batch* x0, Batch* x1) {
  if (!(eps > 0.0)) throw std::invalid_argument("complete_state: eps must be positive");
  Batch b0, b1;
  switch (known) {
    case Known::x1:
      b1 = value;
      b0 = (x - sv.sigma * value) / clip_denominator(sv.a, eps);
      break;
    case Known::x0:
      b0 = value;
      b1 = (x - sv.a * value) / clip_denominator(sv.sigma, eps);
      break;
    case Known::v: {
      // [a sig; a' sig'] [x0; x1] = [x; v]
      const double det = clip_denominator(cross_term(sv), eps);
      b1 = (sv.a * value - sv.a_dot * x) / det;
      b0 = (sv.sigma_dot * x - sv.sigma * value) / det;
      break;
    }
  }
  if (v) *v = known == Known::v ? value : Batch(sv.a_dot * b0 + sv.sigma_dot * b1);
  if (x0) *x0 = std::move(b0);
  if (x1) *x1 = std::move(b1);
}

VelocityTriple complete_state(const ScheduleValues& sv, const Vec& x, Known known,
                              const Vec& value, double eps) {
  Batch v, b0, b1;
  complete_state(sv, as_row(x), known, as_row(value), eps, &v, &b0, &b1);
  return {first_row(v), first_row(b0), first_row(b1)};
}

Batch x0_given_x1(const ScheduleValues& sv, const Batch& x, const Batch& x1_est, double eps) {
  return (x - sv.sigma * x1_est) / clip_denominator(sv.a, eps);
}

Vec x0_given_x1(const ScheduleValues& sv, const Vec& x, const Vec& x1_est, double eps) {
  return (x - sv.sigma * x1_est) / clip_denominator(sv.a, eps);
}

Vec velocity_via_x0(const ScheduleValues& sv, const Vec& x, const Vec& x0) {
  const double r = sv.sigma_dot / sv.sigma;
  return r * x + sv.a * (sv.a_dot / sv.a - r) * x0;
}

Vec velocity_via_x1(const ScheduleValues& sv, const Vec& x, const Vec& x1) {
  const double r = sv.a_dot / sv.a;
  return r * x + sv.sigma * (sv.sigma_dot / sv.sigma - r) * x1;
}

double default_eps(FieldKind kind) { return kind == FieldKind::noise_model ? 1e-3 : 1e-6; }

FieldKind parse_field_kind(std::string_view name) {
  if (name == "velocity" || name == "velocity_model") return FieldKind::velocity_model;
  if (name == "noise" || name == "noise_model") return FieldKind::noise_model;
  if (name == "data" || name == "data_model") return FieldKind::data_model;
  if (name == "oracle") return FieldKind::oracle;
  throw std::invalid_argument("unknown field kind '" + std::string(name) + "'");
}

std::string field_kind_name(FieldKind kind) {
  switch (kind) {
    case FieldKind::velocity_model: return "velocity_model";
    case FieldKind::noise_model: return "noise_model";
    case FieldKind::data_model: return "data_model";
    case FieldKind::oracle: return "oracle";
  }
  return "?";
}

OracleSource::OracleSource(GaussianMixture p0, GaussianMixture p1, ScheduleId schedule,
                           FieldKind output)
    : p0_(std::move(p0)), p1_(std::move(p1)), schedule_(schedule), output_(output) {
  p0_.validate();
  p1_.validate();
  if (p0_.dim() != p1_.dim()) throw std::invalid_argument("OracleSource: dimension mismatch");
}

void OracleSource::moments(const Batch& x, double t, Batch* x0, Batch* x1) const {
  PosteriorOracle(p0_, p1_, eval_schedule(schedule_, t)).moments(x, x0, x1);
}

Batch OracleSource::evaluate(const Batch& x, double t) const {
  const auto sv = eval_schedule(schedule_, t);
  Batch x0, x1;
  PosteriorOracle(p0_, p1_, sv).moments(x, &x0, &x1);
  switch (output_) {
    case FieldKind::noise_model: return x1;
    case FieldKind::data_model: return x0;
    default: return sv.a_dot * x0 + sv.sigma_dot * x1;
  }
}

}  // namespace vfm
