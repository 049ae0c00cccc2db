#pragma once

#include <cstdint>
#include <vector>

#include "vfm/solvers.hpp"
#include "vfm/types.hpp"

namespace vfm::exp {

struct EnergyOptions {
  std::size_t max_points = 0;  // 0 keeps every point; otherwise a seeded subsample
  std::uint64_t seed = 0;
};

// 2 E|a-b| - E|a-a'| - E|b-b'| with all-pairs (V-statistic) means.
// Symmetric in its arguments bit for bit.
double energy_distance(const Batch& a, const Batch& b, const EnergyOptions& opts = {});

// RMS distance between paired rows.
double trajectory_rmse(const Batch& a, const Batch& b);
// Pairs trajectories by index and compares their final states.
double trajectory_rmse(const std::vector<Trajectory>& a, const std::vector<Trajectory>& b);

// Mean over interior points of the distance to the chord through the
// endpoints, divided by the chord length. Needs at least 3 points.
double straightness(const std::vector<Vec>& points);
double straightness(const Trajectory& traj, bool frame = false);

double median(std::vector<double> values);

}  // namespace vfm::exp
