#include "vfm/experiments/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "vfm/config_json.hpp"
#include "vfm/experiments/metrics.hpp"
#include "vfm/nn/checkpoint.hpp"
#include "vfm/nn/train.hpp"

namespace vfm::exp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// --- config reading ---------------------------------------------------------

std::string join(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string join(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

// Runs `fn`, turning library errors into a ConfigError at `path`.
template <class F>
auto at_path(const std::string& path, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(path, e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

void require_object(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& [k, v] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
      throw ConfigError(join(path, k), "unknown key");
  }
}

std::uint64_t read_count(const json& j, const std::string& path, bool allow_zero = false) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < (allow_zero ? 0 : 1))
    throw ConfigError(path, allow_zero ? "expected a non-negative integer" : "expected a positive integer");
  return j.get<std::uint64_t>();
}

double read_positive(const json& j, const std::string& path) {
  if (!j.is_number() || !(j.get<double>() > 0.0)) throw ConfigError(path, "expected a positive number");
  return j.get<double>();
}

bool read_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

std::string read_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

SolverMethod read_solver(const json& j, const std::string& path) {
  SolverMethod m;
  if (j.is_string()) {
    m.method = at_path(path, [&] { return parse_method(j.get<std::string>()); });
    return m;
  }
  require_object(j, path, {"method", "warm_up", "nodes", "reuse_predicted_velocity"});
  if (!j.contains("method")) throw ConfigError(join(path, "method"), "missing");
  m.method = at_path(join(path, "method"), [&] { return parse_method(read_string(j["method"], join(path, "method"))); });
  if (j.contains("warm_up"))
    m.warm_up = at_path(join(path, "warm_up"), [&] { return parse_warm_up(read_string(j["warm_up"], join(path, "warm_up"))); });
  if (j.contains("nodes"))
    m.nodes = at_path(join(path, "nodes"), [&] { return parse_node_space(read_string(j["nodes"], join(path, "nodes"))); });
  if (j.contains("reuse_predicted_velocity"))
    m.reuse_predicted_velocity = read_bool(j["reuse_predicted_velocity"], join(path, "reuse_predicted_velocity"));
  return m;
}

json solver_to_json(const SolverMethod& m) {
  return {{"method", method_name(m.method)},
          {"warm_up", warm_up_name(m.warm_up)},
          {"nodes", node_space_name(m.nodes)},
          {"reuse_predicted_velocity", m.reuse_predicted_velocity}};
}

SourceSpec read_source(const json& j, const std::string& path) {
  SourceSpec s;
  if (j.is_string()) {
    if (j.get<std::string>() != "oracle") throw ConfigError(path, "a bare source must be \"oracle\"");
    return s;
  }
  require_object(j, path, {"type", "output", "path", "velocity"});
  if (!j.contains("type")) throw ConfigError(join(path, "type"), "missing");
  const auto type = read_string(j["type"], join(path, "type"));
  if (type == "oracle") {
    s.type = SourceType::oracle;
    if (j.contains("output"))
      s.output = at_path(join(path, "output"), [&] { return parse_field_kind(read_string(j["output"], join(path, "output"))); });
  } else if (type == "model") {
    s.type = SourceType::model;
    if (!j.contains("path")) throw ConfigError(join(path, "path"), "missing");
    s.model_path = read_string(j["path"], join(path, "path"));
  } else if (type == "constant") {
    s.type = SourceType::constant;
    if (!j.contains("velocity")) throw ConfigError(join(path, "velocity"), "missing");
    const auto v = at_path(join(path, "velocity"), [&] { return j["velocity"].get<std::vector<double>>(); });
    if (v.empty()) throw ConfigError(join(path, "velocity"), "empty");
    s.velocity = Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
  } else {
    throw ConfigError(join(path, "type"), "unknown source type '" + type + "'");
  }
  for (const char* k : {"output", "path", "velocity"}) {
    const bool used = (s.type == SourceType::oracle && std::string(k) == "output") ||
                      (s.type == SourceType::model && std::string(k) == "path") ||
                      (s.type == SourceType::constant && std::string(k) == "velocity");
    if (j.contains(k) && !used) throw ConfigError(join(path, k), "not used by source type '" + type + "'");
  }
  return s;
}

json source_to_json(const SourceSpec& s) {
  switch (s.type) {
    case SourceType::oracle: return {{"type", "oracle"}, {"output", field_kind_name(s.output)}};
    case SourceType::model: return {{"type", "model"}, {"path", s.model_path}};
    case SourceType::constant: return {{"type", "constant"}, {"velocity", std::vector<double>(s.velocity.data(), s.velocity.data() + s.velocity.size())}};
  }
  return {};
}

void read_data(const json& j, const std::string& path, ExperimentConfig& c) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "toy") c.p0 = toy_p0(), c.p1 = toy_p1();
    else if (name == "gaussian") c.p0 = gaussian_p0(), c.p1 = gaussian_p1();
    else throw ConfigError(path, "expected \"toy\", \"gaussian\" or an object with p0 and p1");
    return;
  }
  require_object(j, path, {"p0", "p1"});
  for (const char* k : {"p0", "p1"})
    if (!j.contains(k)) throw ConfigError(join(path, k), "missing");
  c.p0 = at_path(join(path, "p0"), [&] { return mixture_from_json(j["p0"]); });
  c.p1 = at_path(join(path, "p1"), [&] { return mixture_from_json(j["p1"]); });
  if (c.p0.dim() != c.p1.dim()) throw ConfigError(path, "p0 and p1 differ in dimension");
}

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// NaN-propagating max; Eigen's maxCoeff is unspecified on NaN.
double max_abs_propagate(const Batch& b) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    const double a = std::fabs(b.data()[i]);
    if (std::isnan(a)) return NAN;
    m = std::max(m, a);
  }
  return m;
}

double row_max_abs(const Batch& b, Eigen::Index r) {
  double m = 0.0;
  for (Eigen::Index c = 0; c < b.cols(); ++c) {
    const double a = std::fabs(b(r, c));
    if (std::isnan(a)) return NAN;
    m = std::max(m, a);
  }
  return m;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
json optional_json(const std::optional<double>& v) { return v ? finite_or_null(*v) : json(nullptr); }

std::string cell_name(TransformKind flow, const SolverMethod& m, int steps) {
  return transform_name(flow) + "__" + solver_label(m) + "__N" + std::to_string(steps);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) { return splitmix(splitmix(seed) ^ stream); }

std::string solver_label(const SolverMethod& m) {
  std::string s = method_name(m.method);
  const bool multistep = m.method == Method::ab2 || m.method == Method::ab3;
  if (multistep && m.warm_up != WarmUp::increasing_order_ab) s += "-" + warm_up_name(m.warm_up);
  if (m.nodes == NodeSpace::clock) s += "-clock";
  if (is_predictor_corrector(m.method) && !m.reuse_predicted_velocity) s += "-noreuse";
  return s;
}

ExperimentConfig parse_experiment_config(const json& j) {
  require_object(j, "", {"name", "schedule", "source", "data", "flows", "solvers", "steps", "count", "seed", "eps",
                         "trajectories", "energy_points", "reference", "svg", "target"});
  ExperimentConfig c;
  if (j.contains("name")) c.name = read_string(j["name"], "/name");
  if (j.contains("schedule")) c.schedule = at_path("/schedule", [&] { return schedule_from_json(j["schedule"]); });
  if (j.contains("source")) c.source = read_source(j["source"], "/source");
  if (j.contains("data")) read_data(j["data"], "/data", c);
  if (j.contains("flows")) {
    if (!j["flows"].is_array() || j["flows"].empty()) throw ConfigError("/flows", "expected a non-empty array");
    c.flows.clear();
    for (std::size_t i = 0; i < j["flows"].size(); ++i) {
      const auto p = join("/flows", i);
      c.flows.push_back(at_path(p, [&] { return parse_transform_kind(read_string(j["flows"][i], p)); }));
    }
  }
  if (j.contains("solvers")) {
    if (!j["solvers"].is_array() || j["solvers"].empty()) throw ConfigError("/solvers", "expected a non-empty array");
    c.solvers.clear();
    for (std::size_t i = 0; i < j["solvers"].size(); ++i) c.solvers.push_back(read_solver(j["solvers"][i], join("/solvers", i)));
  }
  if (j.contains("steps")) {
    if (!j["steps"].is_array() || j["steps"].empty()) throw ConfigError("/steps", "expected a non-empty array");
    c.steps.clear();
    for (std::size_t i = 0; i < j["steps"].size(); ++i)
      c.steps.push_back(static_cast<int>(read_count(j["steps"][i], join("/steps", i))));
  }
  if (j.contains("count")) c.count = read_count(j["count"], "/count");
  if (j.contains("seed")) c.seed = read_count(j["seed"], "/seed", true);
  if (j.contains("eps")) c.eps = read_positive(j["eps"], "/eps");
  if (j.contains("trajectories")) c.trajectories = read_count(j["trajectories"], "/trajectories", true);
  if (j.contains("energy_points")) c.energy_points = read_count(j["energy_points"], "/energy_points", true);
  if (j.contains("reference")) c.reference = read_bool(j["reference"], "/reference");
  if (j.contains("svg")) c.svg = read_bool(j["svg"], "/svg");
  if (j.contains("target")) c.target = at_path("/target", [&] { return schedule_from_json(j["target"]); });

  if (c.target) {
    for (std::size_t i = 0; i < c.flows.size(); ++i)
      if (!is_sc(c.flows[i])) throw ConfigError(join("/flows", i), "flow-to-flow needs an SC flow");
  }
  if (c.source.type == SourceType::constant && static_cast<std::size_t>(c.source.velocity.size()) != c.p1.dim())
    throw ConfigError("/source/velocity", "length differs from the data dimension");
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  auto c = parse_experiment_config(read_json(path));
  if (c.source.type == SourceType::model && fs::path(c.source.model_path).is_relative())
    c.source.model_path = (fs::path(path).parent_path() / c.source.model_path).string();
  return c;
}

json experiment_config_to_json(const ExperimentConfig& c) {
  json flows = json::array(), solvers = json::array();
  for (auto f : c.flows) flows.push_back(transform_name(f));
  for (const auto& m : c.solvers) solvers.push_back(solver_to_json(m));
  json j = {{"name", c.name},
            {"schedule", schedule_to_json(c.schedule)},
            {"source", source_to_json(c.source)},
            {"data", {{"p0", mixture_to_json(c.p0)}, {"p1", mixture_to_json(c.p1)}}},
            {"flows", flows},
            {"solvers", solvers},
            {"steps", c.steps},
            {"count", c.count},
            {"seed", c.seed},
            {"trajectories", c.trajectories},
            {"energy_points", c.energy_points},
            {"reference", c.reference},
            {"svg", c.svg}};
  if (c.eps) j["eps"] = *c.eps;
  if (c.target) j["target"] = schedule_to_json(*c.target);
  return j;
}

std::shared_ptr<const VelocitySource> make_source(const ExperimentConfig& c) {
  switch (c.source.type) {
    case SourceType::oracle:
      return std::make_shared<OracleSource>(c.p0, c.p1, c.schedule, c.source.output);
    case SourceType::constant: {
      const Vec v = c.source.velocity;
      return std::make_shared<FunctionSource>(FieldKind::velocity_model, static_cast<std::size_t>(v.size()),
                                              [v](const Batch& x, double) {
                                                Batch out(x.rows(), x.cols());
                                                out.rowwise() = v.transpose();
                                                return out;
                                              });
    }
    case SourceType::model: {
      auto ck = nn::load_checkpoint(c.source.model_path);
      if (schedule_to_json(ck.schedule) != schedule_to_json(c.schedule))
        throw ConfigError("/schedule", "model was trained on " + schedule_name(ck.schedule.kind));
      if (ck.params.dim != c.p1.dim()) throw ConfigError("/source/path", "model dimension differs from the data");
      return std::make_shared<nn::MlpSource>(std::move(ck.params), ck.kind);
    }
  }
  return nullptr;
}

double effective_eps(const ExperimentConfig& c, const VelocitySource& src) {
  return c.eps.value_or(default_eps(src.kind()));
}

SampleResult sample_flow(const TransformedField& field, const TimeGrid& grid, const SolverMethod& method,
                         const Batch& x1, std::size_t keep, const std::optional<ScheduleId>& target) {
  std::optional<TargetSchedulePair> pair;
  PhiForm form = PhiForm::interp;
  if (target) {
    if (!is_sc(field.kind())) throw std::invalid_argument("sample_flow: flow-to-flow needs an SC flow");
    pair = TargetSchedulePair{field.schedule(), *target};
    form = *form_of(field.kind());
  }
  keep = std::min<std::size_t>(keep, static_cast<std::size_t>(x1.rows()));
  const std::size_t n_steps = grid.steps();

  SampleResult out;
  Batch mapped, initial_v;
  RunOptions opts;
  opts.keep_all_records = false;
  opts.on_record = [&](const RecordView& r) {
    const Batch* xs = &r.x;
    if (pair) {
      const Batch* dir = &r.direction;
      if (dir->size() == 0) {
        initial_v = field.velocity(r.x, r.t);
        dir = &initial_v;
      }
      mapped = sc_to_target(*pair, r.xbar, r.t, *dir, form, field.eps(), field.clock(r.t));
      xs = &mapped;
    }
    auto& tr = out.tracker;
    tr.t.push_back(r.t);
    tr.max_abs_x.push_back(max_abs_propagate(*xs));
    double mean = 0.0;
    for (Eigen::Index i = 0; i < xs->rows(); ++i) mean += row_max_abs(*xs, i);
    tr.mean_max_abs_x.push_back(xs->rows() ? mean / static_cast<double>(xs->rows()) : 0.0);
    tr.max_abs_xbar.push_back(max_abs_propagate(r.xbar));
    const double v = r.used ? max_abs_propagate(*r.used) : 0.0;
    tr.max_abs_v.push_back(v);
    tr.max_abs_increment.push_back(std::fabs(r.delta_phi) * v);
    tr.delta_phi.push_back(r.delta_phi);
    for (std::size_t i = 0; i < keep; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      out.rows.push_back({i, r.step, r.t, r.nfe_so_far, xs->row(k).transpose(), r.xbar.row(k).transpose(),
                          row_max_abs(*xs, k), r.used ? row_max_abs(*r.used, k) : 0.0, r.delta_phi});
    }
    if (r.step == n_steps) out.final_x = *xs;
  };
  const auto res = run(field, grid, method, x1, opts);
  // grouped by trajectory for the CSV
  std::stable_sort(out.rows.begin(), out.rows.end(),
                   [](const TrajectoryRow& a, const TrajectoryRow& b) { return a.traj_id < b.traj_id; });
  out.nfe = res.nfe;
  out.finite = out.final_x.allFinite();
  return out;
}

PathStraightness path_straightness(const std::vector<TrajectoryRow>& rows) {
  std::map<std::size_t, std::pair<std::vector<Vec>, std::vector<Vec>>> paths;
  for (const auto& r : rows) {
    auto& p = paths[r.traj_id];
    p.first.push_back(r.x);
    p.second.push_back(r.xbar);
  }
  std::vector<double> sx, sf;
  auto add = [](const std::vector<Vec>& pts, std::vector<double>& into) {
    if (pts.size() < 3) return;
    for (const auto& p : pts)
      if (!p.allFinite()) return;
    try {
      into.push_back(straightness(pts));
    } catch (const std::invalid_argument&) {
      // degenerate chord
    }
  };
  for (const auto& [id, p] : paths) {
    add(p.first, sx);
    add(p.second, sf);
  }
  PathStraightness out;
  if (!sx.empty()) out.x = median(sx);
  if (!sf.empty()) out.frame = median(sf);
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& c, const std::string& out_dir) {
  const auto src = make_source(c);
  const double eps = effective_eps(c, *src);
  if (src->dim() != c.p1.dim()) throw ConfigError("/source", "source dimension differs from the data");

  const Batch x1 = sample_mixture(c.p1, c.count, derive_seed(c.seed, 1));
  const Batch ref = sample_mixture(c.p0, c.count, derive_seed(c.seed, 2));
  const Batch ref2 = sample_mixture(c.p0, c.count, derive_seed(c.seed, 3));
  const EnergyOptions eopts{c.energy_points, derive_seed(c.seed, 4)};

  ExperimentResult result;
  result.energy_baseline = energy_distance(ref, ref2, eopts);

  std::optional<Batch> reference_final;
  if (c.reference) {
    const auto oracle = std::make_shared<OracleSource>(c.p0, c.p1, c.schedule);
    RunOptions o;
    o.keep_all_records = false;
    reference_final =
        run(TransformedField(oracle, c.schedule, TransformKind::posterior, 1e-6), time_grid(4096), {Method::rk4}, x1, o)
            .final_x();
  }

  fs::create_directories(out_dir);
  json manifest_cells = json::array();
  for (const auto flow : c.flows) {
    const TransformedField field(src, c.schedule, flow, eps);
    for (const auto& solver : c.solvers) {
      for (const int n : c.steps) {
        CellResult cell;
        cell.flow = flow;
        cell.solver = solver;
        cell.steps = n;
        cell.dir = cell_name(flow, solver, n);
        const fs::path dir = fs::path(out_dir) / cell.dir;
        fs::create_directories(dir);

        const auto s = sample_flow(field, time_grid(n), solver, x1, c.trajectories, c.target);
        cell.finite = s.finite;
        result.all_finite = result.all_finite && s.finite;

        const auto straight = path_straightness(s.rows);
        json m = {{"flow", transform_name(flow)},
                  {"solver", solver_to_json(solver)},
                  {"steps", n},
                  {"count", c.count},
                  {"eps", eps},
                  {"nfe", s.nfe},
                  {"finite", s.finite},
                  {"energy_distance", s.finite ? json(energy_distance(s.final_x, ref, eopts)) : json(nullptr)},
                  {"energy_baseline", result.energy_baseline},
                  {"trajectory_rmse", nullptr},
                  {"straightness", {{"x", optional_json(straight.x)}, {"frame", optional_json(straight.frame)}}},
                  {"final_max_abs_x", finite_or_null(max_abs_propagate(s.final_x))},
                  {"max_abs_x", finite_or_null(*std::max_element(s.tracker.max_abs_x.begin(), s.tracker.max_abs_x.end()))},
                  {"max_abs_v", finite_or_null(*std::max_element(s.tracker.max_abs_v.begin(), s.tracker.max_abs_v.end()))}};
        if (reference_final && s.finite) m["trajectory_rmse"] = trajectory_rmse(s.final_x, *reference_final);
        if (c.target) m["target"] = schedule_to_json(*c.target);
        json tracker = {{"t", s.tracker.t}, {"delta_phi", s.tracker.delta_phi}};
        auto put = [&](const char* key, const std::vector<double>& v) {
          json a = json::array();
          for (double x : v) a.push_back(finite_or_null(x));
          tracker[key] = a;
        };
        put("max_abs_x", s.tracker.max_abs_x);
        put("mean_max_abs_x", s.tracker.mean_max_abs_x);
        put("max_abs_xbar", s.tracker.max_abs_xbar);
        put("max_abs_v", s.tracker.max_abs_v);
        put("max_abs_increment", s.tracker.max_abs_increment);
        m["tracker"] = tracker;
        cell.metrics = m;

        write_samples_csv((dir / "samples.csv").string(), s.final_x);
        write_trajectories_csv((dir / "trajectories.csv").string(), s.rows, src->dim());
        write_json((dir / "metrics.json").string(), m);
        if (c.svg) {
          std::vector<std::vector<Vec>> paths;
          for (const auto& r : s.rows) {
            if (r.traj_id >= paths.size()) paths.resize(r.traj_id + 1);
            paths[r.traj_id].push_back(r.x);
          }
          write_svg((dir / "plot.svg").string(), ref, s.final_x, paths);
        }
        manifest_cells.push_back({{"dir", cell.dir},
                                  {"flow", transform_name(flow)},
                                  {"solver", solver_label(solver)},
                                  {"steps", n},
                                  {"nfe", s.nfe},
                                  {"finite", s.finite},
                                  {"energy_distance", m["energy_distance"]}});
        result.cells.push_back(std::move(cell));
      }
    }
  }
  write_json((fs::path(out_dir) / "manifest.json").string(),
             {{"config", experiment_config_to_json(c)},
              {"energy_baseline", result.energy_baseline},
              {"all_finite", result.all_finite},
              {"cells", manifest_cells}});
  return result;
}

double fit_order(const std::vector<int>& steps, const std::vector<double>& errors) {
  if (steps.size() != errors.size() || steps.size() < 2) throw std::invalid_argument("fit_order: need two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!(errors[i] > 0.0) || steps[i] <= 0) throw std::invalid_argument("fit_order: errors must be positive");
    const double x = std::log(static_cast<double>(steps[i])), y = std::log(errors[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<ConvergenceRow> convergence_study(const ConvergenceOptions& o) {
  auto methods = o.methods;
  if (methods.empty()) {
    const auto clock = NodeSpace::clock;
    methods = {{Method::euler, WarmUp::increasing_order_ab, true, clock},
               {Method::heun, WarmUp::increasing_order_ab, true, clock},
               {Method::ab2, WarmUp::increasing_order_ab, true, clock},
               {Method::rk3, WarmUp::increasing_order_ab, true, clock},
               {Method::ab3, WarmUp::heun, true, clock},
               {Method::rk4, WarmUp::increasing_order_ab, true, clock}};
  }
  const auto oracle = std::make_shared<OracleSource>(o.p0, o.p1, o.schedule);
  const Batch x1 = sample_mixture(o.p1, o.count, derive_seed(o.seed, 1));
  RunOptions ro;
  ro.keep_all_records = false;
  const TransformedField ref_field(oracle, o.schedule, o.reference_flow, o.eps);
  const Batch ref =
      run(ref_field, time_grid(o.reference_steps), {Method::rk4, WarmUp::increasing_order_ab, true, NodeSpace::clock}, x1, ro)
          .final_x();
  const TransformedField field(oracle, o.schedule, o.flow, o.eps);

  std::vector<ConvergenceRow> rows;
  for (const auto& m : methods) {
    ConvergenceRow row;
    row.method = m;
    for (int n : o.steps) {
      const auto res = run(field, time_grid(n), m, x1, ro);
      row.steps.push_back(n);
      row.rmse.push_back(trajectory_rmse(res.final_x(), ref));
      row.nfe.push_back(res.nfe);
    }
    bool positive = true;
    for (double e : row.rmse) positive = positive && e > 0.0 && std::isfinite(e);
    row.order = positive ? fit_order(row.steps, row.rmse) : NAN;
    rows.push_back(std::move(row));
  }
  return rows;
}

json convergence_to_json(const ConvergenceOptions& o, const std::vector<ConvergenceRow>& rows) {
  json r = json::array();
  for (const auto& row : rows) {
    json e = json::array();
    for (double v : row.rmse) e.push_back(finite_or_null(v));
    r.push_back({{"solver", solver_to_json(row.method)},
                 {"label", solver_label(row.method)},
                 {"steps", row.steps},
                 {"rmse", e},
                 {"nfe", row.nfe},
                 {"order", finite_or_null(row.order)}});
  }
  return {{"schedule", schedule_to_json(o.schedule)},
          {"flow", transform_name(o.flow)},
          {"reference", {{"flow", transform_name(o.reference_flow)}, {"solver", "rk4"}, {"steps", o.reference_steps}}},
          {"count", o.count},
          {"seed", o.seed},
          {"eps", o.eps},
          {"rows", r}};
}

}  // namespace vfm::exp
