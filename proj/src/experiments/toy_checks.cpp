#include "vfm/experiments/toy_checks.hpp"

#include <cmath>

#include "vfm/experiments/metrics.hpp"
#include "vfm/nn/train.hpp"

namespace vfm::exp {

EvalSet default_eval_set(std::size_t n) {
  return {sample_mixture(toy_p1(), n, 21), sample_mixture(toy_p0(), n, 22), sample_mixture(toy_p0(), n, 23)};
}

double velocity_error(const nn::Checkpoint& ck, double t) {
  const nn::MlpSource net(ck.params, ck.kind);
  const OracleSource oracle(toy_p0(), toy_p1(), ck.schedule);
  const auto sv = eval_schedule(ck.schedule, t);
  const Batch x = sv.a * sample_mixture(toy_p0(), 2000, 11) + sv.sigma * sample_mixture(toy_p1(), 2000, 12);
  const Batch got = net.evaluate(x, t), want = oracle.evaluate(x, t);
  std::vector<double> rel;
  for (Eigen::Index i = 0; i < x.rows(); ++i) rel.push_back((got.row(i) - want.row(i)).norm() / want.row(i).norm());
  return median(rel);
}

SampleResult sample_checkpoint(const nn::Checkpoint& ck, TransformKind flow, int steps, double eps, const Batch& x1,
                               std::size_t keep, const std::optional<ScheduleId>& target) {
  const auto src = std::make_shared<nn::MlpSource>(ck.params, ck.kind);
  return sample_flow(TransformedField(src, ck.schedule, flow, eps), time_grid(steps), {Method::euler}, x1, keep,
                     target);
}

double energy_to_ref(const SampleResult& s, const EvalSet& ev) {
  return s.finite ? energy_distance(s.final_x, ev.ref) : INFINITY;
}

FewStepMeasure few_step(const nn::Checkpoint& ck, const EvalSet& ev, double eps, int sc_steps, int posterior_steps) {
  return {energy_to_ref(sample_checkpoint(ck, TransformKind::sc_interp_time_adjust, sc_steps, eps, ev.x1), ev),
          energy_to_ref(sample_checkpoint(ck, TransformKind::posterior, posterior_steps, eps, ev.x1), ev)};
}

ReflowMeasure reflow_measure(const nn::Checkpoint& teacher, const nn::Checkpoint& student, const EvalSet& ev,
                             double eps) {
  const auto sc = TransformKind::sc_interp_time_adjust;
  const auto pre = sample_checkpoint(teacher, sc, 50, eps, ev.x1, 256);
  const auto post = sample_checkpoint(student, sc, 50, eps, ev.x1, 256);
  ReflowMeasure m;
  m.pre = energy_to_ref(pre, ev);
  m.post = energy_to_ref(post, ev);
  m.post_one = energy_to_ref(sample_checkpoint(student, sc, 1, eps, ev.x1), ev);
  m.pre_paths = path_straightness(pre.rows);
  m.post_paths = path_straightness(post.rows);
  return m;
}

double overall_max(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) {
    if (std::isnan(x)) return NAN;
    m = std::max(m, x);
  }
  return m;
}

double end_blowup(const Tracker& tr) {
  std::vector<double> mid;
  double ends = 0.0;
  // max_abs_v[i] is the velocity used on the step that starts at t[i - 1]
  for (std::size_t i = 1; i < tr.t.size(); ++i) {
    const double ts = tr.t[i - 1], v = tr.max_abs_v[i];
    if (ts >= 0.25 && ts <= 0.75) mid.push_back(v);
    if (ts >= 0.99 || ts <= 0.01) ends = std::isnan(v) ? INFINITY : std::max(ends, v);
  }
  return ends / median(mid);
}

}  // namespace vfm::exp
