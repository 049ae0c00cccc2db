#include "vfm/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vfm {

namespace {

// d/dt sqrt(1 - abar) is unbounded at t = 0. The floor keeps it finite so
// that ratios formed downstream (e.g. divided by the cross term) stay finite.
constexpr double kSigmaFloor = 1e-150;

struct AlphaBar {
  double abar;
  double one_minus;  // 1 - abar without cancellation
  double beta;       // -d(log abar)/dt
};

AlphaBar alpha_bar(const ScheduleParams& p, double t) {
  const double beta = t * (p.beta_max - p.beta_min) + p.beta_min;
  const double expo = 0.5 * t * (beta + p.beta_min);
  return {std::exp(-expo), -std::expm1(-expo), beta};
}

}  // namespace

ScheduleId::ScheduleId(ScheduleKind k, ScheduleParams p) : kind(k), params(p) {
  if (k == ScheduleKind::vp || k == ScheduleKind::sub_vp) {
    if (!(p.beta_max > p.beta_min && p.beta_min > 0.0))
      throw std::invalid_argument("schedule: need beta_max > beta_min > 0");
  }
  if (k == ScheduleKind::ve) {
    if (!(p.sigma_max > p.sigma_min && p.sigma_min > 0.0))
      throw std::invalid_argument("schedule: need sigma_max > sigma_min > 0");
  }
}

ScheduleValues eval_schedule(const ScheduleId& id, double t) {
  if (!(t >= 0.0 && t <= 1.0))
    throw std::domain_error("eval_schedule: t outside [0, 1]");
  ScheduleValues sv;
  sv.t = t;
  const auto& p = id.params;
  switch (id.kind) {
    case ScheduleKind::vp: {
      const auto ab = alpha_bar(p, t);
      sv.a = std::sqrt(ab.abar);
      sv.sigma = std::sqrt(ab.one_minus);
      sv.a_dot = -0.5 * ab.beta * sv.a;
      sv.sigma_dot = ab.abar * ab.beta / (2.0 * std::max(sv.sigma, kSigmaFloor));
      break;
    }
    case ScheduleKind::sub_vp: {
      const auto ab = alpha_bar(p, t);
      sv.a = std::sqrt(ab.abar);
      sv.sigma = ab.one_minus;
      sv.a_dot = -0.5 * ab.beta * sv.a;
      sv.sigma_dot = ab.abar * ab.beta;
      break;
    }
    case ScheduleKind::ve: {
      // Shifted so that sigma(0) = 0; sigma(1) = sigma_max - sigma_min.
      const double log_ratio = std::log(p.sigma_max / p.sigma_min);
      const double g = std::exp(t * log_ratio);
      sv.a = 1.0;
      sv.sigma = p.sigma_min * (g - 1.0);
      sv.a_dot = 0.0;
      sv.sigma_dot = p.sigma_min * log_ratio * g;
      break;
    }
    case ScheduleKind::rectified:
      sv.a = 1.0 - t;
      sv.sigma = t;
      sv.a_dot = -1.0;
      sv.sigma_dot = 1.0;
      break;
    case ScheduleKind::third_degree: {
      const double s = 1.0 - t;
      sv.a = s * (3.0 * s * s - 6.0 * s + 4.0);
      sv.a_dot = -(9.0 * s * s - 12.0 * s + 4.0);
      if (p.literal_sigma) {
        sv.sigma = 2.0 * t * t * t - 3.0 * t + 2.0;
        sv.sigma_dot = 6.0 * t * t - 3.0;
      } else {
        sv.sigma = t * (2.0 * t * t - 3.0 * t + 2.0);
        sv.sigma_dot = 6.0 * t * t - 6.0 * t + 2.0;
      }
      break;
    }
    case ScheduleKind::fifth_degree: {
      const double s = 1.0 - t;
      const double s2 = s * s, t2 = t * t;
      sv.a = s2 * s2 * s;
      sv.sigma = t2 * t2 * t;
      sv.a_dot = -5.0 * s2 * s2;
      sv.sigma_dot = 5.0 * t2 * t2;
      break;
    }
  }
  return sv;
}

double clip_denominator(double x, double eps) {
  const double mag = std::max(std::fabs(x), eps);
  return std::signbit(x) && x != 0.0 ? -mag : mag;
}

double cross_term(const ScheduleValues& sv) {
  return sv.a * sv.sigma_dot - sv.a_dot * sv.sigma;
}

PhiPair phi(const ScheduleValues& sv, PhiForm form, double eps) {
  const double den = clip_denominator(form == PhiForm::interp ? sv.a + sv.sigma : sv.a, eps);
  return {sv.sigma / den, cross_term(sv) / (den * den), form};
}

PhiPair phi(const ScheduleId& id, double t, PhiForm form, double eps) {
  return phi(eval_schedule(id, t), form, eps);
}

ScheduleReport check_schedule_conditions(const ScheduleId& id) {
  const auto s0 = eval_schedule(id, 0.0);
  const auto s1 = eval_schedule(id, 1.0);
  ScheduleReport r;
  r.a0 = s0.a;
  r.sigma0 = s0.sigma;
  r.a1 = s1.a;
  r.a0_ok = s0.a == 1.0;
  r.sigma0_ok = s0.sigma == 0.0;
  r.a1_zero = s1.a == 0.0;
  r.a1_approximately_zero = std::fabs(s1.a) < 1e-2;
  return r;
}

ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "vp") return ScheduleKind::vp;
  if (name == "sub-vp") return ScheduleKind::sub_vp;
  if (name == "ve") return ScheduleKind::ve;
  if (name == "rectified") return ScheduleKind::rectified;
  if (name == "third-degree") return ScheduleKind::third_degree;
  if (name == "fifth-degree") return ScheduleKind::fifth_degree;
  throw std::invalid_argument("unknown schedule '" + std::string(name) + "'");
}

std::string schedule_name(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::vp: return "vp";
    case ScheduleKind::sub_vp: return "sub-vp";
    case ScheduleKind::ve: return "ve";
    case ScheduleKind::rectified: return "rectified";
    case ScheduleKind::third_degree: return "third-degree";
    case ScheduleKind::fifth_degree: return "fifth-degree";
  }
  return "?";
}

}  // namespace vfm
