#include "vfm/experiments/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vfm::exp {

ConfigError::ConfigError(std::string path, const std::string& message)
    : std::runtime_error((path.empty() ? std::string("/") : path) + ": " + message), path_(std::move(path)) {}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

double parse_double(std::string_view s, const std::string& where) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  if (s == "nan") return NAN;
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument(where + ": not a number '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

void write_samples_csv(const std::string& path, const Batch& x) {
  auto f = open_out(path);
  for (Eigen::Index c = 0; c < x.cols(); ++c) f << (c ? "," : "") << "x_" << c;
  f << '\n';
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) f << (c ? "," : "") << format_double(x(r, c));
    f << '\n';
  }
}

Batch read_samples_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot read " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::invalid_argument(path + ": empty file");
  const auto header = split(line);
  const auto d = header.size();
  std::vector<double> vals;
  std::size_t n = 0;
  while (std::getline(f, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    const std::string where = path + ":" + std::to_string(n + 2);
    if (cells.size() != d) throw std::invalid_argument(where + ": expected " + std::to_string(d) + " columns");
    for (const auto& c : cells) vals.push_back(parse_double(c, where));
    ++n;
  }
  if (n == 0) throw std::invalid_argument(path + ": no samples");
  Batch out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::copy(vals.begin(), vals.end(), out.data());
  return out;
}

void write_trajectories_csv(const std::string& path, const std::vector<TrajectoryRow>& rows, std::size_t dim) {
  auto f = open_out(path);
  f << "traj_id,step,t,nfe_so_far";
  for (std::size_t c = 0; c < dim; ++c) f << ",x_" << c;
  for (std::size_t c = 0; c < dim; ++c) f << ",xbar_" << c;
  f << ",max_abs_x,max_abs_v,delta_phi\n";
  for (const auto& r : rows) {
    f << r.traj_id << ',' << r.step << ',' << format_double(r.t) << ',' << r.nfe_so_far;
    for (Eigen::Index c = 0; c < r.x.size(); ++c) f << ',' << format_double(r.x[c]);
    for (Eigen::Index c = 0; c < r.xbar.size(); ++c) f << ',' << format_double(r.xbar[c]);
    f << ',' << format_double(r.max_abs_x) << ',' << format_double(r.max_abs_v) << ',' << format_double(r.delta_phi)
      << '\n';
  }
}

void write_json(const std::string& path, const nlohmann::json& j) {
  auto f = open_out(path);
  f << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("", "cannot read " + path);
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", path + ": " + e.what());
  }
}

void write_svg(const std::string& path, const Batch& reference, const Batch& samples,
               const std::vector<std::vector<Vec>>& paths) {
  constexpr double size = 480.0, pad = 16.0;
  double lo[2] = {INFINITY, INFINITY}, hi[2] = {-INFINITY, -INFINITY};
  auto grow = [&](double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b)) return;
    lo[0] = std::min(lo[0], a), hi[0] = std::max(hi[0], a);
    lo[1] = std::min(lo[1], b), hi[1] = std::max(hi[1], b);
  };
  auto coord = [](const auto& v, int k) { return v.size() > k ? double(v[k]) : 0.0; };
  for (const Batch* b : {&reference, &samples})
    for (Eigen::Index r = 0; r < b->rows(); ++r) grow((*b)(r, 0), b->cols() > 1 ? (*b)(r, 1) : 0.0);
  for (const auto& p : paths)
    for (const auto& v : p) grow(coord(v, 0), coord(v, 1));
  if (!(lo[0] <= hi[0])) lo[0] = lo[1] = -1.0, hi[0] = hi[1] = 1.0;
  const double span = std::max({hi[0] - lo[0], hi[1] - lo[1], 1e-12});
  auto px = [&](double a) { return pad + (a - lo[0]) / span * (size - 2 * pad); };
  auto py = [&](double b) { return size - pad - (b - lo[1]) / span * (size - 2 * pad); };

  auto f = open_out(path);
  char buf[128];
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  auto dots = [&](const Batch& b, const char* color) {
    for (Eigen::Index r = 0; r < b.rows(); ++r) {
      const double a = b(r, 0), c = b.cols() > 1 ? b(r, 1) : 0.0;
      if (!std::isfinite(a) || !std::isfinite(c)) continue;
      std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"1.2\" fill=\"%s\"/>\n", px(a), py(c), color);
      f << buf;
    }
  };
  dots(reference, "#9ecae1");
  for (const auto& p : paths) {
    f << "<polyline fill=\"none\" stroke=\"#636363\" stroke-width=\"0.6\" points=\"";
    for (const auto& v : p) {
      if (!std::isfinite(coord(v, 0)) || !std::isfinite(coord(v, 1))) break;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(coord(v, 0)), py(coord(v, 1)));
      f << buf;
    }
    f << "\"/>\n";
  }
  dots(samples, "#e6550d");
  f << "</svg>\n";
}

}  // namespace vfm::exp
