// Checks on trained toy models. Models come from the cache named by
// VFM_MODEL_CACHE, or are trained on the spot.

#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "vfm/experiments/dataset.hpp"
#include "vfm/experiments/metrics.hpp"
#include "vfm/experiments/runner.hpp"
#include "vfm/experiments/toy_checks.hpp"
#include "vfm/experiments/zoo.hpp"

using namespace vfm;
using namespace vfm::exp;

namespace {

nn::Checkpoint model(ScheduleKind s, nn::LossKind loss = nn::LossKind::velocity_matching) {
  const char* dir = std::getenv("VFM_MODEL_CACHE");
  return train_cached(zoo_train_job(s, loss), dir ? dir : "");
}

// x_t drawn from the marginal at t.
Batch marginal(const ScheduleId& id, double t) {
  const auto sv = eval_schedule(id, t);
  return sv.a * sample_mixture(toy_p0(), 2000, 11) + sv.sigma * sample_mixture(toy_p1(), 2000, 12);
}

double median_relative(const Batch& got, const Batch& want) {
  std::vector<double> rel;
  for (Eigen::Index i = 0; i < got.rows(); ++i) rel.push_back((got.row(i) - want.row(i)).norm() / want.row(i).norm());
  return median(rel);
}

}  // namespace

TEST_CASE("trained velocity models are within 25% of the exact velocity") {
  for (auto s : {ScheduleKind::third_degree, ScheduleKind::fifth_degree, ScheduleKind::vp, ScheduleKind::rectified}) {
    const auto ck = model(s);
    for (double t : {0.25, 0.5, 0.75}) {
      const double err = velocity_error(ck, t);
      CAPTURE(schedule_name(s));
      CAPTURE(t);
      MESSAGE(schedule_name(s) << " t=" << t << " median relative error " << err);
      CHECK(err <= 0.25);
    }
  }
}

TEST_CASE("rectified velocity model vs noise model converted to a velocity") {
  const auto vel = model(ScheduleKind::rectified);
  const auto noise = model(ScheduleKind::rectified, nn::LossKind::noise_matching);
  const nn::MlpSource v(vel.params, vel.kind), n(noise.params, noise.kind);
  const OracleSource oracle(toy_p0(), toy_p1(), vel.schedule);
  for (double t : {0.25, 0.5, 0.75}) {
    const auto sv = eval_schedule(vel.schedule, t);
    const Batch x = marginal(vel.schedule, t);
    Batch from_noise, x0, x1;
    complete_state(sv, x, Known::x1, n.evaluate(x, t), 1e-3, &from_noise, &x0, &x1);
    const Batch exact = oracle.evaluate(x, t), direct = v.evaluate(x, t);
    const double disagree = median_relative(direct, from_noise);
    // reported, not ranked
    MESSAGE("t=" << t << " median disagreement " << disagree << "; error vs exact: velocity model "
                 << median_relative(direct, exact) << ", noise model " << median_relative(from_noise, exact));
    CHECK(std::isfinite(disagree));
  }
}

TEST_CASE("trained third-degree model: SC Euler beats posterior Euler at five steps") {
  const auto ck = model(ScheduleKind::third_degree);
  const auto src = std::make_shared<nn::MlpSource>(ck.params, ck.kind);
  const Batch x1 = sample_mixture(toy_p1(), 2048, 21), ref = sample_mixture(toy_p0(), 2048, 22);
  auto ed = [&](TransformKind flow) {
    return energy_distance(sample_flow(TransformedField(src, ck.schedule, flow, 1e-3), time_grid(5), {Method::euler}, x1).final_x, ref);
  };
  const double sc = ed(TransformKind::sc_interp_time_adjust), post = ed(TransformKind::posterior);
  MESSAGE("SC " << sc << " posterior " << post);
  CHECK(sc < post);
}
