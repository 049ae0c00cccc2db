// Pilot measurements behind the frozen toy-model thresholds.
// For each training budget: training time, velocity error against the exact
// field, and every quantity the acceptance run compares.
//
//   vfm_calibrate --budget 4000x512 --budget 10000x1024 --cache build/model_cache

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "vfm/experiments/metrics.hpp"
#include "vfm/experiments/toy_checks.hpp"
#include "vfm/experiments/zoo.hpp"

using namespace vfm;
using namespace vfm::exp;

namespace {

struct Budget {
  int iterations, batch;
};

std::string cache_dir;

nn::Checkpoint train(ScheduleKind s, nn::LossKind loss, const Budget& b) {
  auto job = zoo_train_job(s, loss);
  job.config.iterations = b.iterations;
  job.config.batch = b.batch;
  const auto t0 = std::chrono::steady_clock::now();
  bool hit = false;
  auto ck = train_cached(job, cache_dir, &hit);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("  %-13s %-17s %s %.1f s\n", schedule_name(s).c_str(), loss_name(loss).c_str(),
              hit ? "cached " : "trained", secs);
  return ck;
}

void run_budget(const Budget& b, const std::vector<double>& eps_list) {
  std::printf("budget %d iterations x batch %d\n", b.iterations, b.batch);
  const auto ev = default_eval_set();
  std::printf("  energy baseline %.4g\n", energy_distance(ev.ref, ev.ref2));
  const std::vector<ScheduleKind> toy{ScheduleKind::third_degree, ScheduleKind::fifth_degree, ScheduleKind::vp};

  std::printf("velocity error (median relative, t = 0.25 / 0.5 / 0.75)\n");
  for (auto s : {ScheduleKind::third_degree, ScheduleKind::fifth_degree, ScheduleKind::vp, ScheduleKind::rectified}) {
    const auto ck = train(s, nn::LossKind::velocity_matching, b);
    std::printf("    %.3f / %.3f / %.3f\n", velocity_error(ck, 0.25), velocity_error(ck, 0.5), velocity_error(ck, 0.75));
  }

  for (double eps : eps_list) {
    std::printf("few-step SC, eps %g: SC N=5 vs posterior N=20 energy distance\n", eps);
    for (auto s : toy) {
      const auto m = few_step(train(s, nn::LossKind::velocity_matching, b), ev, eps);
      std::printf("    %.4g vs %.4g, ratio %.3f\n", m.sc, m.posterior, m.sc / m.posterior);
    }
  }

  std::printf("noise model, SC Euler N=20: tracked max|x|\n");
  const auto noise = train(ScheduleKind::third_degree, nn::LossKind::noise_matching, b);
  for (double eps : {1e-6, 1e-3}) {
    const auto r = sample_checkpoint(noise, TransformKind::sc_interp_time_adjust, 20, eps, ev.x1);
    std::printf("    eps %g: %.4g (energy distance %.4g)\n", eps, overall_max(r.tracker.max_abs_x), energy_to_ref(r, ev));
  }

  for (double eps : eps_list) {
    std::printf("flow-to-flow, eps %g, N=1000\n", eps);
    const auto rect = train(ScheduleKind::rectified, nn::LossKind::velocity_matching, b);
    for (auto s : toy) {
      const auto own = train(s, nn::LossKind::velocity_matching, b);
      const double sim = energy_to_ref(
          sample_checkpoint(rect, TransformKind::sc_interp_time_adjust, 1000, eps, ev.x1, 0, ScheduleId(s)), ev);
      const double mine = energy_to_ref(sample_checkpoint(own, TransformKind::posterior, 1000, eps, ev.x1), ev);
      std::printf("    rectified -> %s: %.4g vs own %.4g\n", schedule_name(s).c_str(), sim, mine);
    }
    for (auto s : toy) {
      const auto r = sample_checkpoint(train(s, nn::LossKind::velocity_matching, b),
                                       TransformKind::sc_interp_time_adjust, 1000, eps, ev.x1, 0,
                                       ScheduleId(ScheduleKind::third_degree));
      std::printf("    %s as source: end/mid velocity ratio %.4g\n", schedule_name(s).c_str(), end_blowup(r.tracker));
    }
  }

  std::printf("reflow of the third-degree teacher, eps 1e-3\n");
  auto teacher_job = zoo_train_job(ScheduleKind::third_degree, nn::LossKind::velocity_matching);
  teacher_job.config.iterations = b.iterations;
  teacher_job.config.batch = b.batch;
  auto rj = zoo_reflow_job();
  rj.config.iterations = b.iterations;
  rj.config.batch = b.batch;
  const auto teacher = train_cached(teacher_job, cache_dir);
  const auto student = reflow_cached(rj, teacher_job, 1e-3, cache_dir);
  const auto m = reflow_measure(teacher, student, ev, 1e-3);
  std::printf("    pre N=50 %.4g, post N=1 %.4g, post N=50 %.4g\n", m.pre, m.post_one, m.post);
  std::printf("    straightness pre x %.4g frame %.4g, post %.4g\n", m.pre_paths.x.value_or(NAN),
              m.pre_paths.frame.value_or(NAN), m.post_paths.x.value_or(NAN));
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pilot measurements for the toy-model thresholds"};
  std::vector<std::string> budgets{"10000x1024"};
  std::vector<double> eps_list{1e-3, 1e-6};
  app.add_option("--budget", budgets, "iterations x batch, repeatable");
  app.add_option("--eps", eps_list, "Denominator clips for the few-step and flow-to-flow sweeps");
  app.add_option("--cache", cache_dir, "Model cache directory");
  CLI11_PARSE(app, argc, argv);
  for (const auto& s : budgets) {
    Budget b{};
    if (std::sscanf(s.c_str(), "%dx%d", &b.iterations, &b.batch) != 2 || b.iterations <= 0 || b.batch <= 0) {
      std::fprintf(stderr, "bad budget '%s'\n", s.c_str());
      return 1;
    }
    run_budget(b, eps_list);
  }
  return 0;
}
