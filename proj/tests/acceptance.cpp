// Acceptance run: one PASS/FAIL line per criterion, measurements after it.
// usage: vfm_acceptance [model-cache-dir]
// Trained models are cached by job in the given directory (none: retrain).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "support.hpp"
#include "vfm/experiments/dataset.hpp"
#include "vfm/experiments/metrics.hpp"
#include "vfm/experiments/runner.hpp"
#include "vfm/experiments/toy_checks.hpp"
#include "vfm/experiments/zoo.hpp"
#include "vfm/gmm.hpp"
#include "vfm/solvers.hpp"
#include "vfm/transforms.hpp"
#include "vfm/velocity.hpp"

using namespace vfm;
using namespace vfm::exp;
using namespace testing_support;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> lines;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    lines.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void info(const std::string& what) { lines.push_back("     " + what); }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}
std::string g3(double v) { return fmt("%.3g", v); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double scale_of(const Batch& b) { return std::max(1.0, b.cwiseAbs().maxCoeff()); }

std::shared_ptr<OracleSource> toy_oracle(const ScheduleId& id, FieldKind out = FieldKind::oracle) {
  return std::make_shared<OracleSource>(toy_p0(), toy_p1(), id, out);
}

Batch marginal_like(const ScheduleId& id, double t, std::size_t n, std::mt19937_64& rng) {
  const auto sv = eval_schedule(id, t);
  const Batch x0 = sample_mixture(toy_p0(), n, rng());
  const Batch x1 = sample_mixture(toy_p1(), n, rng());
  return sv.a * x0 + sv.sigma * x1;
}

GaussianMixture std_normal(std::size_t d) { return GaussianMixture::single(Vec::Zero(d), Mat::Identity(d, d)); }

const TransformKind kAllKinds[] = {TransformKind::posterior,
                                   TransformKind::sn_interp,
                                   TransformKind::sn_scale,
                                   TransformKind::sc_interp_time_adjust,
                                   TransformKind::sc_scale_time_adjust,
                                   TransformKind::sc_interp_shift,
                                   TransformKind::sc_scale_shift};

// ---------------------------------------------------------------- 1

Outcome exact_identities() {
  Outcome o;
  {
    const auto vp = ScheduleId(ScheduleKind::vp);
    const auto noise = toy_oracle(vp, FieldKind::noise_model);
    const TransformedField f(noise, vp, TransformKind::sc_scale_time_adjust, 1e-6);
    const Batch start = sample_mixture(toy_p1(), 64, 5);
    const auto grid = time_grid(10);
    Batch ddim = start;
    for (std::size_t i = 0; i + 1 < grid.points.size(); ++i) {
      const double t = grid.points[i], tn = grid.points[i + 1];
      ddim = ddim_step(eval_schedule(vp, t), eval_schedule(vp, tn), ddim, noise->evaluate(ddim, t), 1e-6);
    }
    const double err = max_abs_diff(run(f, grid, {Method::euler}, start).final_x(), ddim) / scale_of(ddim);
    o.require(err <= 1e-10, "DDIM vs SC-scale Euler, 10-step vp grid: rel err " + g3(err));
  }
  {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    std::size_t n = 0;
    for (const auto& id : all_schedules()) {
      const auto base = toy_oracle(id);
      for (auto [ta, vs] : {std::pair{TransformKind::sc_interp_time_adjust, TransformKind::sc_interp_shift},
                            std::pair{TransformKind::sc_scale_time_adjust, TransformKind::sc_scale_shift}}) {
        const TransformedField fa(base, id, ta, 1e-6), fb(base, id, vs, 1e-6);
        for (int i = 0; i < 1000; ++i, ++n) {
          const double t = 0.001 + 0.999 * u(rng), t_next = t * u(rng);
          const Batch x = marginal_like(id, t, 1, rng);
          const Batch ya = fa.from_frame(euler_step(fa, fa.to_frame(x, t, nullptr), t, t_next), t_next, nullptr);
          Batch dir = fb.velocity(x, t);
          const Batch xbar_next = euler_step(fb, fb.to_frame(x, t, &dir), t, t_next, &dir);
          const Batch yb = fb.from_frame(xbar_next, t_next, &dir);
          const double scale = std::max({1.0, ya.cwiseAbs().maxCoeff(), dir.cwiseAbs().maxCoeff(),
                                         fb.denominator(eval_schedule(id, t_next)) * xbar_next.cwiseAbs().maxCoeff()});
          worst = std::max(worst, max_abs_diff(ya, yb) / scale);
        }
      }
    }
    o.require(worst <= 1e-10, "time-adjusted vs shifted SC Euler, " + std::to_string(n) +
                                  " random states over 6 schedules: worst rel err " + g3(worst));
  }
  {
    std::mt19937_64 rng(1);
    const Batch x = random_batch(8, 2, rng, 5.0), dir = random_batch(8, 2, rng);
    double worst = 0.0;
    for (const auto& id : all_schedules())
      for (auto k : kAllKinds) {
        const TransformedField f(toy_oracle(id), id, k, 1e-6);
        for (double t : {0.0, 0.1, 0.5, 0.9})
          worst = std::max(worst, max_abs_diff(f.from_frame(f.to_frame(x, t, &dir), t, &dir), x) / scale_of(x));
      }
    o.require(worst <= 1e-12, "frame round trips, every schedule and kind: worst rel err " + g3(worst));

    const auto rect = ScheduleId(ScheduleKind::rectified);
    double fixed = 0.0;
    for (double t : {0.0, 0.3, 0.8})
      for (auto k : {TransformKind::posterior, TransformKind::sn_interp, TransformKind::sc_interp_time_adjust,
                     TransformKind::sc_interp_shift}) {
        const TransformedField f(toy_oracle(rect), rect, k, 1e-6);
        fixed = std::max(fixed, max_abs_diff(f.to_frame(x, t, &dir), x) / scale_of(x));
      }
    o.require(fixed <= 1e-12, "rectified schedule is a fixed point of the interp transforms: rel err " + g3(fixed));
  }
  {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    double forms = 0.0, recon = 0.0;
    for (const auto& id : all_schedules()) {
      const auto p0 = random_mixture(3, 2, rng), p1 = random_mixture(2, 2, rng);
      for (int i = 0; i < 100; ++i) {
        const auto sv = eval_schedule(id, u(rng));
        const Vec x = random_vec(2, rng, 3.0);
        const auto pm = posterior_moments(p0, p1, sv, x);
        const Vec v = posterior_velocity(p0, p1, sv, x);
        const double s = std::max(1.0, v.norm());
        forms = std::max({forms, max_abs_diff(v, velocity_via_x0(sv, x, pm.x0_given_t)) / s,
                          max_abs_diff(v, velocity_via_x1(sv, x, pm.x1_given_t)) / s});
        recon = std::max(recon, max_abs_diff(Vec(sv.a * pm.x0_given_t + sv.sigma * pm.x1_given_t), x) /
                                    std::max(1.0, x.norm()));
      }
    }
    o.require(forms <= 1e-8, "velocity from the data estimate vs from the noise estimate: rel err " + g3(forms));
    o.require(recon <= 1e-8, "a x0|t + sigma x1|t = x: rel err " + g3(recon));
  }
  {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.02, 0.98);
    const auto p0 = random_mixture(3, 2, rng);
    double worst = 0.0;
    for (const auto& id : all_schedules())
      for (int i = 0; i < 50; ++i) {
        const auto sv = eval_schedule(id, u(rng));
        const Vec x = random_vec(2, rng, 3.0);
        const auto pm = posterior_moments(p0, std_normal(2), sv, x);
        worst = std::max(worst, (pm.x1_given_t + sv.sigma * score(p0, std_normal(2), sv, x)).norm());
      }
    o.require(worst <= 1e-6, "Tweedie, standard normal noise: |x1|t + sigma score| " + g3(worst));
  }
  return o;
}

// ---------------------------------------------------------------- 2

// Decreasing times with neighbouring steps within a factor 20.
std::vector<double> random_steps(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0), s(0.0, 1.0);
  std::vector<double> t{s(rng)};
  const double h = 0.2 * s(rng) + 1e-3;
  while (t.size() < n) t.push_back(t.back() - h * u(rng));
  return t;
}

std::vector<double> random_decreasing(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> t(n);
  for (auto& v : t) v = u(rng);
  std::sort(t.begin(), t.end(), std::greater<>());
  return t;
}

Outcome solver_coefficients() {
  Outcome o;
  std::mt19937_64 rng(21);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto grid = random_steps(4, rng);
    auto sum_err = [](const std::vector<double>& L) {
      double s = 0.0;
      for (double v : L) s += v;
      return std::fabs(s - 1.0);
    };
    for (std::size_t k : {2u, 3u, 4u}) worst = std::max(worst, sum_err(ab_coefficients(std::span(grid).first(k))));
    for (std::size_t k : {2u, 3u}) worst = std::max(worst, sum_err(am_coefficients(std::span(grid).first(k))));
  }
  o.require(worst <= 1e-12, "sum of multistep weights on 1000 random grids: |sum - 1| " + g3(worst));

  const double even2[] = {0.0, 1.0, 2.0}, even3[] = {0.0, 1.0, 2.0, 3.0};
  const auto l2 = ab_coefficients(even2), l3 = ab_coefficients(even3);
  o.require(l2 == std::vector<double>{1.5, -0.5}, "AB2 even spacing = (3/2, -1/2)");
  o.require(l3 == std::vector<double>{23.0 / 12, -16.0 / 12, 5.0 / 12}, "AB3 even spacing = (23/12, -16/12, 5/12)");

  std::mt19937_64 prng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double poly = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const double c0 = u(prng), c1 = u(prng), c2 = u(prng);
    const auto ts = random_decreasing(4, prng);
    for (int k : {1, 2, 3}) {
      auto p = [&](double s) { return c0 + (k > 1 ? c1 * s : 0.0) + (k > 2 ? c2 * s * s : 0.0); };
      auto P = [&](double s) { return c0 * s + (k > 1 ? c1 * s * s / 2 : 0.0) + (k > 2 ? c2 * s * s * s / 3 : 0.0); };
      const std::vector<double> times(ts.begin(), ts.begin() + k + 1);
      const double exact = P(times[0]) - P(times[1]);
      const double scale = std::max(1.0, std::fabs(exact));
      const auto L = ab_coefficients(times);
      double step = 0.0;
      for (int j = 0; j < k; ++j) step += L[static_cast<std::size_t>(j)] * p(times[static_cast<std::size_t>(j) + 1]);
      poly = std::max(poly, std::fabs((times[0] - times[1]) * step - exact) / scale);
      if (k >= 2) {
        const std::vector<double> am(ts.begin(), ts.begin() + k);
        const auto Lc = am_coefficients(am);
        double cs = 0.0;
        for (int j = 0; j < k; ++j) cs += Lc[static_cast<std::size_t>(j)] * p(am[static_cast<std::size_t>(j)]);
        poly = std::max(poly, std::fabs((am[0] - am[1]) * cs - exact) / scale);
      }
    }
  }
  o.require(poly <= 1e-10, "AB1-3 / AM2-3 exact on polynomials of matching degree: rel err " + g3(poly));
  return o;
}

// ---------------------------------------------------------------- 3

Outcome convergence_orders() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = convergence_study(ConvergenceOptions{});
  const double secs = seconds_since(t0);
  const std::map<Method, std::pair<double, double>> windows{{Method::euler, {0.8, 1.3}}, {Method::heun, {1.7, 2.4}},
                                                            {Method::ab2, {1.7, 2.4}},   {Method::rk3, {2.6, 3.5}},
                                                            {Method::ab3, {2.6, 3.5}}};
  for (const auto& r : rows) {
    const auto w = windows.find(r.method.method);
    const std::string line = solver_label(r.method) + " order " + fmt("%.2f", r.order);
    if (w == windows.end()) {
      o.info(line);
      continue;
    }
    o.require(r.order >= w->second.first && r.order <= w->second.second,
              line + " in [" + g3(w->second.first) + ", " + g3(w->second.second) + "]");
  }
  o.require(secs < 60.0, "runtime " + fmt("%.1f", secs) + " s < 60 s");
  return o;
}

// ---------------------------------------------------------------- 4

Outcome statistical_equivalence() {
  Outcome o;
  const auto id = ScheduleId(ScheduleKind::third_degree);
  const auto t0 = std::chrono::steady_clock::now();
  const Batch x1 = sample_mixture(toy_p1(), 4096, 41);
  const TransformedField f(toy_oracle(id), id, TransformKind::posterior, 1e-6);
  const auto s = sample_flow(f, time_grid(1000), {Method::euler}, x1);
  const Batch fresh = sample_mixture(toy_p0(), 4096, 42), fresh2 = sample_mixture(toy_p0(), 4096, 43);
  const double ed = energy_distance(s.final_x, fresh), base = energy_distance(fresh, fresh2);
  const double secs = seconds_since(t0);
  o.require(s.finite && ed <= 3.0 * base, "third-degree oracle posterior, Euler N=1000: energy distance " + g3(ed) +
                                              " <= 3 x baseline " + g3(base) + " (ratio " + fmt("%.2f", ed / base) + ")");
  o.require(secs < 60.0, "runtime " + fmt("%.1f", secs) + " s < 60 s");
  return o;
}

// ---------------------------------------------------------------- 5-8

struct Zoo {
  std::string cache;
  std::map<std::string, nn::Checkpoint> loaded;

  nn::Checkpoint get(ScheduleKind s, nn::LossKind loss) {
    const auto job = zoo_train_job(s, loss);
    const std::string key = train_job_to_json(job).dump();
    if (auto it = loaded.find(key); it != loaded.end()) return it->second;
    const auto t0 = std::chrono::steady_clock::now();
    bool hit = false;
    auto ck = train_cached(job, cache, &hit);
    std::printf("  [model] %s %s: %s (%.1f s)\n", schedule_name(s).c_str(), loss_name(loss).c_str(),
                hit ? "cached" : "trained", seconds_since(t0));
    std::fflush(stdout);
    return loaded[key] = ck;
  }
  nn::Checkpoint velocity(ScheduleKind s) { return get(s, nn::LossKind::velocity_matching); }
};

constexpr double kModelEps = 1e-3;

Outcome few_step_sc(Zoo& zoo, const EvalSet& ev) {
  Outcome o;
  o.info("energy baseline (two p0 draws) " + g3(energy_distance(ev.ref, ev.ref2)));
  for (auto s : {ScheduleKind::third_degree, ScheduleKind::fifth_degree, ScheduleKind::vp}) {
    const auto m = few_step(zoo.velocity(s), ev, kModelEps);
    const double ratio = m.sc / m.posterior;
    const std::string line = schedule_name(s) + ": SC Euler N=5 " + g3(m.sc) + ", posterior Euler N=20 " +
                             g3(m.posterior) + ", ratio " + fmt("%.2f", ratio);
    if (s == ScheduleKind::third_degree)
      o.require(ratio <= 1.5, line + " <= 1.5");
    else
      o.require(ratio < 1.0, line + " < 1 (same direction)");
  }
  return o;
}

Outcome reflow(Zoo& zoo, const EvalSet& ev) {
  Outcome o;
  const auto teacher_job = zoo_train_job(ScheduleKind::third_degree, nn::LossKind::velocity_matching);
  const auto teacher = zoo.velocity(ScheduleKind::third_degree);
  const auto t0 = std::chrono::steady_clock::now();
  bool hit = false;
  const auto student = reflow_cached(zoo_reflow_job(), teacher_job, kModelEps, zoo.cache, &hit);
  std::printf("  [model] reflow student: %s (%.1f s)\n", hit ? "cached" : "trained", seconds_since(t0));

  const auto m = reflow_measure(teacher, student, ev, kModelEps);
  o.require(m.post_one <= 2.0 * m.pre, "post-reflow SC Euler N=1 energy distance " + g3(m.post_one) +
                                           " <= 2 x pre-reflow SC Euler N=50 " + g3(m.pre));
  o.info("post-reflow SC Euler N=50 energy distance " + g3(m.post));

  // Pre-reflow paths are measured both in x and in the SC frame; the
  // straighter of the two is the bar.
  const auto& sp = m.pre_paths;
  const double pre_s = std::min(sp.x.value_or(INFINITY), sp.frame.value_or(INFINITY));
  const double post_s = m.post_paths.x.value_or(INFINITY);
  o.require(post_s < pre_s, "median straightness post-reflow " + g3(post_s) + " < pre-reflow " + g3(pre_s) +
                                " (pre x " + g3(sp.x.value_or(NAN)) + ", SC frame " + g3(sp.frame.value_or(NAN)) +
                                "; 256 trajectories, N=50)");
  return o;
}

Outcome robustness(Zoo& zoo, const EvalSet& ev) {
  Outcome o;
  const auto noise = zoo.get(ScheduleKind::third_degree, nn::LossKind::noise_matching);
  const auto tight = sample_checkpoint(noise, TransformKind::sc_interp_time_adjust, 20, 1e-6, ev.x1);
  const auto loose = sample_checkpoint(noise, TransformKind::sc_interp_time_adjust, 20, 1e-3, ev.x1);
  const double a = overall_max(tight.tracker.max_abs_x), b = overall_max(loose.tracker.max_abs_x);
  const bool ratio_ok = std::isinf(a) || std::isnan(a) ? std::isfinite(b) : a >= 10.0 * b;
  o.require(ratio_ok, "third-degree noise model, SC Euler N=20: tracked max|x| eps 1e-6 " + g3(a) + " vs eps 1e-3 " +
                          g3(b) + ", ratio " + g3(a / b) + " >= 10");
  o.info("noise model final energy distance: eps 1e-6 " + g3(energy_to_ref(tight, ev)) + ", eps 1e-3 " +
         g3(energy_to_ref(loose, ev)));

  for (auto s : {ScheduleKind::third_degree, ScheduleKind::fifth_degree, ScheduleKind::vp}) {
    const auto ck = zoo.velocity(s);
    for (auto flow : {TransformKind::sc_interp_time_adjust, TransformKind::sc_scale_time_adjust})
      for (int n : {5, 20, 100}) {
        const auto r = sample_checkpoint(ck, flow, n, 1e-6, ev.x1);
        o.require(r.finite, schedule_name(s) + " velocity model, " + transform_name(flow) + " Euler N=" +
                                std::to_string(n) + " at eps 1e-6: all finite, max|x| " +
                                g3(overall_max(r.tracker.max_abs_x)));
      }
  }
  return o;
}

Outcome flow_to_flow(Zoo& zoo, const EvalSet& ev) {
  Outcome o;
  const auto rect = zoo.velocity(ScheduleKind::rectified);
  for (auto s : {ScheduleKind::third_degree, ScheduleKind::fifth_degree, ScheduleKind::vp}) {
    const auto own_ck = zoo.velocity(s);
    const double sim =
        energy_to_ref(sample_checkpoint(rect, TransformKind::sc_interp_time_adjust, 1000, kModelEps, ev.x1, 0, ScheduleId(s)), ev);
    const double own = energy_to_ref(sample_checkpoint(own_ck, TransformKind::posterior, 1000, kModelEps, ev.x1), ev);
    o.require(sim <= 2.0 * own, "rectified -> " + schedule_name(s) + " at N=1000: energy distance " + g3(sim) +
                                    " <= 2 x own flow " + g3(own));
  }
  const auto third = ScheduleId(ScheduleKind::third_degree);
  for (auto s : {ScheduleKind::fifth_degree, ScheduleKind::third_degree, ScheduleKind::vp}) {
    const auto r = sample_checkpoint(zoo.velocity(s), TransformKind::sc_interp_time_adjust, 1000, kModelEps, ev.x1, 0, third);
    const double ratio = end_blowup(r.tracker);
    const std::string line = schedule_name(s) + " as source: end/mid SC velocity ratio " + g3(ratio);
    if (s == ScheduleKind::fifth_degree)
      o.require(ratio > 10.0, line + " > 10 (blow-up)");
    else
      o.require(ratio <= 10.0, line + " <= 10 (no blow-up)");
  }
  return o;
}

// ---------------------------------------------------------------- 9

Outcome gradients() {
  Outcome o;
  const auto id = ScheduleId(ScheduleKind::third_degree);
  auto batch_of = [](const GaussianMixture& p0, const GaussianMixture& p1, std::size_t d, std::uint64_t seed) {
    nn::LossBatch b;
    b.x0 = sample_mixture(p0, 16, seed).leftCols(static_cast<Eigen::Index>(d));
    b.x1 = sample_mixture(p1, 16, seed + 1).leftCols(static_cast<Eigen::Index>(d));
    std::mt19937_64 rng(seed + 2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 16; ++i) b.t.push_back(u(rng));
    return b;
  };
  for (std::size_t d : {1u, 2u})
    for (auto kind : {nn::LossKind::velocity_matching, nn::LossKind::noise_matching}) {
      const auto p = nn::MLPParams::init(d, 17 + d);
      const auto g = check_gradients(p, batch_of(gaussian_p0(), gaussian_p1(), d, 40 + d), id, kind);
      o.require(g.coords == p.size() && g.worst_rel <= 1e-4,
                "d=" + std::to_string(d) + " " + loss_name(kind) + ": " + std::to_string(g.coords) +
                    " coordinates, worst rel err " + g3(g.worst_rel) + " at " + g.worst_where);
      const auto toy = check_gradients(p, batch_of(toy_p0(), toy_p1(), d, 40 + d), id, kind);
      o.info("toy-mixture batch (information only): worst rel err " + g3(toy.worst_rel) + " at " + toy.worst_where);
    }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  Zoo zoo;
  if (argc > 1) zoo.cache = argv[1];
  const EvalSet ev = default_eval_set();

  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"exact identities", exact_identities},
      {"solver coefficients", solver_coefficients},
      {"convergence orders", convergence_orders},
      {"statistical equivalence", statistical_equivalence},
      {"few-step SC sampling", [&] { return few_step_sc(zoo, ev); }},
      {"reflow", [&] { return reflow(zoo, ev); }},
      {"numerical robustness", [&] { return robustness(zoo, ev); }},
      {"flow-to-flow", [&] { return flow_to_flow(zoo, ev); }},
      {"gradient correctness", gradients},
  };

  int failed = 0;
  std::vector<std::string> summary;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].run();
    } catch (const std::exception& e) {
      out.require(false, std::string("exception: ") + e.what());
    }
    const std::string line = "criterion " + std::to_string(i + 1) + " " + criteria[i].name + ": " +
                             (out.pass ? "PASS" : "FAIL");
    std::printf("%s (%.1f s)\n", line.c_str(), seconds_since(t0));
    for (const auto& l : out.lines) std::printf("  %s\n", l.c_str());
    std::fflush(stdout);
    summary.push_back(line);
    failed += out.pass ? 0 : 1;
  }
  std::printf("\nsummary\n");
  for (const auto& l : summary) std::printf("%s\n", l.c_str());
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
