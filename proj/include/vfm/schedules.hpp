#pragma once

#include <string>
#include <string_view>

namespace vfm {

enum class ScheduleKind { vp, sub_vp, ve, rectified, third_degree, fifth_degree };

// Parameters are only read by the schedules that use them.
struct ScheduleParams {
  double beta_min = 0.1;   // vp, sub_vp
  double beta_max = 20.0;  // vp, sub_vp
  double sigma_min = 0.01; // ve
  double sigma_max = 50.0; // ve
  // third_degree: use sigma = 2t^3 - 3t + 2 instead of 2t^3 - 3t^2 + 2t.
  // The literal form has sigma(0) = 2 and only exists for comparison.
  bool literal_sigma = false;
};

struct ScheduleId {
  ScheduleKind kind = ScheduleKind::rectified;
  ScheduleParams params{};

  ScheduleId() = default;
  ScheduleId(ScheduleKind k, ScheduleParams p = {});  // validates params
};

struct ScheduleValues {
  double t = 0.0;
  double a = 1.0;
  double sigma = 0.0;
  double a_dot = 0.0;
  double sigma_dot = 0.0;
};

enum class PhiForm { interp, scale };

struct PhiPair {
  double phi = 0.0;
  double phi_dot = 0.0;
  PhiForm form = PhiForm::interp;
};

struct ScheduleReport {
  double a0 = 0.0;
  double sigma0 = 0.0;
  double a1 = 0.0;
  bool a0_ok = false;
  bool sigma0_ok = false;
  bool a1_zero = false;             // exactly zero
  bool a1_approximately_zero = false;  // |a_1| < 1e-2
};

// Throws std::domain_error for t outside [0, 1].
ScheduleValues eval_schedule(const ScheduleId& id, double t);

double clip_denominator(double x, double eps);
double cross_term(const ScheduleValues& sv);

PhiPair phi(const ScheduleValues& sv, PhiForm form, double eps);
PhiPair phi(const ScheduleId& id, double t, PhiForm form, double eps);

ScheduleReport check_schedule_conditions(const ScheduleId& id);

// "vp", "sub-vp", "ve", "rectified", "third-degree", "fifth-degree".
ScheduleKind parse_schedule_kind(std::string_view name);
std::string schedule_name(ScheduleKind kind);

}  // namespace vfm
