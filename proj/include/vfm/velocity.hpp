#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include "vfm/gmm.hpp"
#include "vfm/schedules.hpp"
#include "vfm/types.hpp"

namespace vfm {

enum class FieldKind { velocity_model, noise_model, data_model, oracle };

enum class Frame { original, sn_interp, sn_scale, sc };

struct FlowState {
  Vec x;
  double t = 1.0;
  Frame frame = Frame::original;
};

struct VelocityTriple {
  Vec v;
  Vec x0_given_t;
  Vec x1_given_t;
};

// Which of the three representations is known.
enum class Known { v, x0, x1 };

Vec target_velocity(const ScheduleValues& sv, const Vec& x0, const Vec& x1);
Batch target_velocity(const ScheduleValues& sv, const Batch& x0, const Batch& x1);

VelocityTriple complete_state(const ScheduleValues& sv, const Vec& x, Known known,
                              const Vec& value, double eps);
// Row-wise; outputs may be null.
void complete_state(const ScheduleValues& sv, const Batch& x, Known known, const Batch& value,
                    double eps, Batch* v, Batch* x0, Batch* x1);

Vec x0_given_x1(const ScheduleValues& sv, const Vec& x, const Vec& x1_est, double eps);
Batch x0_given_x1(const ScheduleValues& sv, const Batch& x, const Batch& x1_est, double eps);

// Velocity written through x0|t alone, (sig'/sig) x + a (a'/a - sig'/sig) x0,
// and through x1|t alone, (a'/a) x + sig (sig'/sig - a'/a) x1. No clipping.
Vec velocity_via_x0(const ScheduleValues& sv, const Vec& x, const Vec& x0);
Vec velocity_via_x1(const ScheduleValues& sv, const Vec& x, const Vec& x1);

// 1e-3 for noise_model, 1e-6 otherwise.
double default_eps(FieldKind kind);

FieldKind parse_field_kind(std::string_view name);
std::string field_kind_name(FieldKind kind);

// Something that can be queried for model output on a batch at time t.
// velocity_model/oracle return v, noise_model returns x1|t, data_model x0|t.
class VelocitySource {
 public:
  virtual ~VelocitySource() = default;
  virtual FieldKind kind() const = 0;
  virtual std::size_t dim() const = 0;
  virtual Batch evaluate(const Batch& x, double t) const = 0;
};

// Exact posterior quantities for a Gaussian-mixture pair. `output` picks what
// evaluate() returns so the oracle can stand in for any model kind.
class OracleSource final : public VelocitySource {
 public:
  OracleSource(GaussianMixture p0, GaussianMixture p1, ScheduleId schedule,
               FieldKind output = FieldKind::oracle);

  FieldKind kind() const override { return output_; }
  std::size_t dim() const override { return p0_.dim(); }
  Batch evaluate(const Batch& x, double t) const override;

  void moments(const Batch& x, double t, Batch* x0, Batch* x1) const;
  const GaussianMixture& p0() const { return p0_; }
  const GaussianMixture& p1() const { return p1_; }
  const ScheduleId& schedule() const { return schedule_; }

 private:
  GaussianMixture p0_, p1_;
  ScheduleId schedule_;
  FieldKind output_;
};

// Wraps a plain function; handy for synthetic fields in tests.
class FunctionSource final : public VelocitySource {
 public:
  using Fn = std::function<Batch(const Batch&, double)>;
  FunctionSource(FieldKind kind, std::size_t dim, Fn fn)
      : kind_(kind), dim_(dim), fn_(std::move(fn)) {}
  FieldKind kind() const override { return kind_; }
  std::size_t dim() const override { return dim_; }
  Batch evaluate(const Batch& x, double t) const override { return fn_(x, t); }

 private:
  FieldKind kind_;
  std::size_t dim_;
  Fn fn_;
};

}  // namespace vfm
