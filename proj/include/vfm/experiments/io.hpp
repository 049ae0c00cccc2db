#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "vfm/types.hpp"

namespace vfm::exp {

// Invalid configuration. `path` is a JSON pointer to the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Shortest text that reads back to the same double.
std::string format_double(double v);

// Header x_0..x_{d-1}, one row per sample.
void write_samples_csv(const std::string& path, const Batch& x);
Batch read_samples_csv(const std::string& path);

struct TrajectoryRow {
  std::size_t traj_id = 0;
  std::size_t step = 0;
  double t = 0.0;
  std::size_t nfe_so_far = 0;
  Vec x, xbar;
  double max_abs_x = 0.0;
  double max_abs_v = 0.0;
  double delta_phi = 0.0;
};

void write_trajectories_csv(const std::string& path, const std::vector<TrajectoryRow>& rows, std::size_t dim);

// Pretty-printed with a trailing newline.
void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

// Scatter of reference and generated samples plus trajectory polylines,
// first two coordinates only.
void write_svg(const std::string& path, const Batch& reference, const Batch& samples,
               const std::vector<std::vector<Vec>>& paths);

}  // namespace vfm::exp
