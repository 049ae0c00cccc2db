#include "vfm/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace vfm {

TimeGrid time_grid(int n_steps, double t_start, double t_end) {
  if (n_steps < 1) throw std::invalid_argument("time_grid: n_steps must be >= 1");
  if (t_start == t_end) throw std::invalid_argument("time_grid: empty interval");
  TimeGrid g;
  g.points.resize(static_cast<std::size_t>(n_steps) + 1);
  const double span = t_end - t_start;
  for (int i = 0; i <= n_steps; ++i) g.points[static_cast<std::size_t>(i)] = t_start + span * i / n_steps;
  g.points.front() = t_start;
  g.points.back() = t_end;
  return g;
}

Method parse_method(std::string_view name) {
  static const std::pair<std::string_view, Method> table[] = {
      {"euler", Method::euler},   {"midpoint", Method::midpoint}, {"heun", Method::heun},
      {"rk3", Method::rk3},       {"rk4", Method::rk4},           {"ab2", Method::ab2},
      {"ab3", Method::ab3},       {"ab1am2", Method::ab1am2},     {"ab2am2", Method::ab2am2},
      {"ab2am3", Method::ab2am3}, {"ab3am3", Method::ab3am3},
  };
  for (const auto& [n, m] : table)
    if (n == name) return m;
  throw std::invalid_argument("unknown solver '" + std::string(name) + "'");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::euler: return "euler";
    case Method::midpoint: return "midpoint";
    case Method::heun: return "heun";
    case Method::rk3: return "rk3";
    case Method::rk4: return "rk4";
    case Method::ab2: return "ab2";
    case Method::ab3: return "ab3";
    case Method::ab1am2: return "ab1am2";
    case Method::ab2am2: return "ab2am2";
    case Method::ab2am3: return "ab2am3";
    case Method::ab3am3: return "ab3am3";
  }
  return "?";
}

WarmUp parse_warm_up(std::string_view name) {
  if (name == "ab") return WarmUp::increasing_order_ab;
  if (name == "heun") return WarmUp::heun;
  if (name == "rk3") return WarmUp::rk3;
  throw std::invalid_argument("unknown warm-up '" + std::string(name) + "'");
}

std::string warm_up_name(WarmUp w) {
  switch (w) {
    case WarmUp::increasing_order_ab: return "ab";
    case WarmUp::heun: return "heun";
    case WarmUp::rk3: return "rk3";
  }
  return "?";
}

NodeSpace parse_node_space(std::string_view name) {
  if (name == "time") return NodeSpace::time;
  if (name == "clock") return NodeSpace::clock;
  throw std::invalid_argument("unknown node space '" + std::string(name) + "'");
}

std::string node_space_name(NodeSpace n) { return n == NodeSpace::clock ? "clock" : "time"; }

bool is_runge_kutta(Method m) {
  return m == Method::euler || m == Method::midpoint || m == Method::heun || m == Method::rk3 || m == Method::rk4;
}

bool is_predictor_corrector(Method m) {
  return m == Method::ab1am2 || m == Method::ab2am2 || m == Method::ab2am3 || m == Method::ab3am3;
}

void Tableau::validate() const {
  const auto s = c.size();
  if (s == 0 || b.size() != s || a.size() != s) throw std::invalid_argument("tableau: inconsistent sizes");
  double sb = 0.0;
  for (double v : b) sb += v;
  if (std::fabs(sb - 1.0) > 1e-12) throw std::invalid_argument("tableau: weights do not sum to 1");
  if (c[0] != 0.0) throw std::invalid_argument("tableau: explicit methods need c_1 = 0");
  for (std::size_t k = 0; k < s; ++k) {
    if (a[k].size() != k) throw std::invalid_argument("tableau: a must be strictly lower triangular");
    double row = 0.0;
    for (double v : a[k]) row += v;
    if (std::fabs(row - c[k]) > 1e-12) throw std::invalid_argument("tableau: row sum of a differs from c");
    if (k > 0 && !(c[k] > 0.0)) throw std::invalid_argument("tableau: interior nodes must be positive");
  }
}

Tableau tableau_for(Method m) {
  switch (m) {
    case Method::euler: return {{0.0}, {{}}, {1.0}};
    case Method::midpoint: return {{0.0, 0.5}, {{}, {0.5}}, {0.0, 1.0}};
    case Method::heun: return {{0.0, 1.0}, {{}, {1.0}}, {0.5, 0.5}};
    case Method::rk3: return {{0.0, 0.5, 1.0}, {{}, {0.5}, {-1.0, 2.0}}, {1.0 / 6, 2.0 / 3, 1.0 / 6}};
    case Method::rk4:
      return {{0.0, 0.5, 0.5, 1.0}, {{}, {0.5}, {0.0, 0.5}, {0.0, 0.0, 1.0}}, {1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6}};
    default: throw std::invalid_argument("tableau_for: not a Runge-Kutta method");
  }
}

namespace {

void require_distinct(std::span<const double> times) {
  for (std::size_t i = 0; i < times.size(); ++i)
    for (std::size_t j = i + 1; j < times.size(); ++j)
      if (times[i] == times[j]) throw std::invalid_argument("coefficients: duplicate times");
}

}  // namespace

// Closed forms evaluated relative to t_i: the absolute-time expressions
// cancel O(1) terms down to O(h^2) when steps are small.
std::vector<double> ab_coefficients(std::span<const double> times) {
  require_distinct(times);
  if (times.size() < 2 || times.size() > 4) throw std::invalid_argument("ab_coefficients: need 2 to 4 times");
  const double h = times[0] - times[1];
  switch (times.size()) {
    case 2: return {1.0};
    case 3: {
      const double d1 = times[2] - times[1];
      return {(h - 2.0 * d1) / (-2.0 * d1), h / (2.0 * d1)};
    }
    default: {
      const double d1 = times[2] - times[1], d2 = times[3] - times[1];
      const double l0 = (2.0 * h * h - 3.0 * (d1 + d2) * h + 6.0 * d1 * d2) / (6.0 * d1 * d2);
      const double l1 = h * (2.0 * h - 3.0 * d2) / (6.0 * d1 * (d1 - d2));
      const double l2 = h * (2.0 * h - 3.0 * d1) / (6.0 * d2 * (d2 - d1));
      return {l0, l1, l2};
    }
  }
}

std::vector<double> am_coefficients(std::span<const double> times) {
  require_distinct(times);
  switch (times.size()) {
    case 2: return {0.5, 0.5};
    case 3: {
      const double h = times[0] - times[1], d1 = times[2] - times[1];
      const double l0 = (2.0 * h - 3.0 * d1) / (6.0 * (h - d1));
      const double l1 = (h - 3.0 * d1) / (-6.0 * d1);
      const double l2 = h * h / (6.0 * (h - d1) * d1);
      return {l0, l1, l2};
    }
    default: throw std::invalid_argument("am_coefficients: need 2 or 3 times");
  }
}

namespace {

struct Evaluator {
  const TransformedField& field;
  std::size_t nfe = 0;

  Batch operator()(const Batch& x, double t) {
    ++nfe;
    return field.velocity(x, t);
  }
};

// One explicit RK step from a frame state whose first stage f1 is known.
// Shift frames recover stage samples with `frame_dir`, the direction the
// frame state was built with. `last` receives the last evaluated velocity.
Batch rk_advance(Evaluator& eval, const Batch& xbar, double t, double t_next, const Tableau& tab, const Batch& f1,
                 const Batch& frame_dir, Batch& last, Batch* used, NodeSpace nodes) {
  const auto& field = eval.field;
  const double clock_t = field.clock(t), clock_next = field.clock(t_next);
  std::vector<Batch> f{f1};
  for (std::size_t k = 1; k < tab.c.size(); ++k) {
    double tau, dc;
    if (nodes == NodeSpace::clock && is_time_adjust(field.kind())) {
      dc = tab.c[k] * (clock_next - clock_t);
      tau = tab.c[k] == 1.0 ? t_next : field.time_at_clock(clock_t + dc, t, t_next);
    } else {
      tau = t + tab.c[k] * (t_next - t);
      dc = field.clock(tau) - clock_t;
    }
    Batch s = Batch::Zero(xbar.rows(), xbar.cols());
    for (std::size_t j = 0; j < k; ++j)
      if (tab.a[k][j] != 0.0) s += (tab.a[k][j] / tab.c[k]) * f[j];
    const Batch stage = xbar + dc * s;
    f.push_back(eval(field.from_frame(stage, tau, &frame_dir), tau));
  }
  last = f.back();
  Batch vo = Batch::Zero(xbar.rows(), xbar.cols());
  for (std::size_t j = 0; j < f.size(); ++j)
    if (tab.b[j] != 0.0) vo += tab.b[j] * f[j];
  Batch out = xbar + (clock_next - clock_t) * vo;
  if (used) *used = std::move(vo);
  return out;
}

double row_max_abs(const Batch& b, Eigen::Index r) { return b.row(r).cwiseAbs().maxCoeff(); }

}  // namespace

Batch rk_step(const TransformedField& field, const Batch& xbar, double t, double t_next, const Tableau& tableau,
              Batch* dir, NodeSpace nodes) {
  tableau.validate();
  Evaluator eval{field};
  const bool shift = is_shift(field.kind());
  if (shift && (!dir || dir->size() == 0)) throw std::invalid_argument("rk_step: shift kinds need a direction");
  const Batch x = field.from_frame(xbar, t, dir);
  const Batch f1 = eval(x, t);
  const Batch start = shift ? field.to_frame(x, t, &f1) : xbar;
  Batch last;
  Batch out = rk_advance(eval, start, t, t_next, tableau, f1, f1, last, nullptr, nodes);
  if (dir) *dir = f1;
  return out;
}

Batch euler_step(const TransformedField& field, const Batch& xbar, double t, double t_next, Batch* dir) {
  return rk_step(field, xbar, t, t_next, tableau_for(Method::euler), dir);
}

Trajectory RunResult::trajectory(std::size_t i) const {
  Trajectory tr;
  tr.nfe = nfe;
  const auto r = static_cast<Eigen::Index>(i);
  for (std::size_t k = 0; k < x.size(); ++k) {
    tr.records.push_back({times[k], nfe_so_far[k], x[k].row(r).transpose(), xbar[k].row(r).transpose(),
                          diagnostics[k][i]});
  }
  return tr;
}

std::vector<Trajectory> RunResult::trajectories() const {
  std::vector<Trajectory> out;
  out.reserve(count());
  for (std::size_t i = 0; i < count(); ++i) out.push_back(trajectory(i));
  return out;
}

RunResult run(const TransformedField& field, const TimeGrid& grid, const SolverMethod& method, const Batch& x_init,
              const RunOptions& options) {
  const auto& pts = grid.points;
  if (pts.size() < 2) throw std::invalid_argument("run: grid needs at least one step");
  for (double t : pts)
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("run: grid outside [0, 1]");
  const bool decreasing = pts[1] < pts[0];
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (decreasing ? !(pts[i] < pts[i - 1]) : !(pts[i] > pts[i - 1]))
      throw std::invalid_argument("run: grid must be strictly monotone");
  if (static_cast<std::size_t>(x_init.cols()) != field.dim()) throw std::invalid_argument("run: dimension mismatch");

  const Method m = method.method;
  const bool shift = is_shift(field.kind());
  const auto n = x_init.rows();
  const std::size_t n_steps = grid.steps();

  Evaluator eval{field};
  RunResult res;

  Batch x = x_init;
  double t = pts[0];
  Batch f_cur;            // frame velocity at (x, t)
  bool have_f = false;
  Batch direction;        // latest evaluated frame velocity
  Batch xbar;
  std::deque<Batch> history;  // f at t_{i-1}, t_{i-2}, most recent first
  std::deque<double> hist_t;

  if (shift) {
    f_cur = eval(x, t);
    have_f = true;
    direction = f_cur;
    xbar = field.to_frame(x, t, &direction);
  } else {
    xbar = field.to_frame(x, t, nullptr);
  }

  auto record = [&](std::size_t step, const Batch* used, double delta) {
    const bool keep = options.keep_all_records || step == 0 || step == n_steps;
    if (options.on_record)
      options.on_record(RecordView{step, t, field.clock(t), x, xbar, direction, used, delta, eval.nfe});
    if (!keep) return;
    std::vector<RecordDiagnostics> diag(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < n; ++r) {
      auto& d = diag[static_cast<std::size_t>(r)];
      d.max_abs_x = row_max_abs(x, r);
      d.max_abs_xbar = row_max_abs(xbar, r);
      d.max_abs_v = used ? row_max_abs(*used, r) : 0.0;
      d.delta_phi = delta;
    }
    res.times.push_back(t);
    res.nfe_so_far.push_back(eval.nfe);
    res.steps.push_back(step);
    res.x.push_back(x);
    res.xbar.push_back(xbar);
    res.diagnostics.push_back(std::move(diag));
  };
  record(0, nullptr, 0.0);

  auto node = [&](double s) { return method.nodes == NodeSpace::clock ? field.clock(s) : s; };

  int ab_order = 0, pred_order = 0, corr_order = 0;
  if (m == Method::ab2) ab_order = 2;
  if (m == Method::ab3) ab_order = 3;
  if (m == Method::ab1am2) pred_order = 1, corr_order = 2;
  if (m == Method::ab2am2) pred_order = 2, corr_order = 2;
  if (m == Method::ab2am3) pred_order = 2, corr_order = 3;
  if (m == Method::ab3am3) pred_order = 3, corr_order = 3;

  for (std::size_t i = 0; i < n_steps; ++i) {
    const double t_next = pts[i + 1];
    if (!have_f) f_cur = eval(x, t);
    have_f = false;
    // Shift frames are rebuilt from x every step and recovered with the
    // direction they were built with.
    Batch frame_dir;
    if (shift) {
      frame_dir = f_cur;
      xbar = field.to_frame(x, t, &frame_dir);
    }
    direction = f_cur;
    const double delta = field.increment(t, t_next);

    Batch used, xbar_next, reused;
    const bool warm_rk = ab_order > 0 && static_cast<int>(i) < ab_order - 1 && method.warm_up != WarmUp::increasing_order_ab;
    if (is_runge_kutta(m) || warm_rk) {
      const Method rk = is_runge_kutta(m) ? m : (method.warm_up == WarmUp::heun ? Method::heun : Method::rk3);
      xbar_next = rk_advance(eval, xbar, t, t_next, tableau_for(rk), f_cur, frame_dir, direction, &used,
                             method.nodes);
    } else {
      const int avail = static_cast<int>(history.size());
      const int p = ab_order > 0 ? std::min(ab_order, avail + 1) : std::min(pred_order, avail + 1);
      std::vector<double> times{node(t_next), node(t)};
      for (int j = 0; j < p - 1; ++j) times.push_back(node(hist_t[static_cast<std::size_t>(j)]));
      const auto L = ab_coefficients(times);
      Batch pred = L[0] * f_cur;
      for (int j = 1; j < p; ++j) pred += L[static_cast<std::size_t>(j)] * history[static_cast<std::size_t>(j - 1)];
      if (ab_order > 0) {
        used = std::move(pred);
        xbar_next = xbar + delta * used;
      } else {
        const Batch xbar_a = xbar + delta * pred;
        const Batch f_a = eval(field.from_frame(xbar_a, t_next, &frame_dir), t_next);
        const int c = std::min(corr_order, avail + 2);
        std::vector<double> ctimes{node(t_next), node(t)};
        if (c == 3) ctimes.push_back(node(hist_t[0]));
        const auto Lc = am_coefficients(ctimes);
        used = Lc[0] * f_a + Lc[1] * f_cur;
        if (c == 3) used += Lc[2] * history[0];
        xbar_next = xbar + delta * used;
        direction = f_a;
        if (method.reuse_predicted_velocity) reused = f_a;
      }
    }

    // Past velocities for the multistep formulas, most recent first.
    if (!is_runge_kutta(m)) {
      history.push_front(f_cur);
      hist_t.push_front(t);
      if (history.size() > 2) history.pop_back(), hist_t.pop_back();
    }
    if (reused.size() > 0) {
      f_cur = std::move(reused);
      have_f = true;
    }

    x = field.from_frame(xbar_next, t_next, &frame_dir);
    xbar = std::move(xbar_next);
    t = t_next;
    record(i + 1, &used, delta);
  }
  res.nfe = eval.nfe;
  return res;
}

}  // namespace vfm
