#include "vfm/experiments/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "vfm/kernels/kernels.hpp"

namespace vfm::exp {

namespace {

Batch subsample(const Batch& x, std::size_t k, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (k == 0 || k >= n) return x;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  Batch out(static_cast<Eigen::Index>(k), x.cols());
  for (std::size_t i = 0; i < k; ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

// Total order on sample sets so that argument order never matters.
bool precedes(const Batch& a, const Batch& b) {
  if (a.rows() != b.rows()) return a.rows() < b.rows();
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

double mean_pair_distance(const Batch& a, const Batch& b) {
  const auto& K = kernels::active();
  const double s = K.pair_distance_sum(a.data(), static_cast<std::size_t>(a.rows()), b.data(),
                                       static_cast<std::size_t>(b.rows()), static_cast<std::size_t>(a.cols()));
  return s / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
}

}  // namespace

double energy_distance(const Batch& a_in, const Batch& b_in, const EnergyOptions& opts) {
  if (a_in.rows() == 0 || b_in.rows() == 0) throw std::invalid_argument("energy_distance: empty sample set");
  if (a_in.cols() != b_in.cols()) throw std::invalid_argument("energy_distance: dimension mismatch");
  const bool swap = precedes(b_in, a_in);
  const Batch& first = swap ? b_in : a_in;
  const Batch& second = swap ? a_in : b_in;
  const Batch a = subsample(first, opts.max_points, opts.seed);
  const Batch b = subsample(second, opts.max_points, opts.seed + 1);
  const double ed = 2.0 * mean_pair_distance(a, b) - mean_pair_distance(a, a) - mean_pair_distance(b, b);
  return std::max(ed, 0.0);
}

double trajectory_rmse(const Batch& a, const Batch& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("trajectory_rmse: count mismatch");
  if (a.rows() == 0) throw std::invalid_argument("trajectory_rmse: empty");
  return std::sqrt((a - b).rowwise().squaredNorm().mean());
}

double trajectory_rmse(const std::vector<Trajectory>& a, const std::vector<Trajectory>& b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("trajectory_rmse: count mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i].records.back().x - b[i].records.back().x).squaredNorm();
  return std::sqrt(s / static_cast<double>(a.size()));
}

double straightness(const std::vector<Vec>& pts) {
  if (pts.size() < 3) throw std::invalid_argument("straightness: need at least 3 records");
  const Vec chord = pts.back() - pts.front();
  const double len = chord.norm();
  if (!(len > 0.0)) throw std::invalid_argument("straightness: degenerate chord");
  const Vec u = chord / len;
  double s = 0.0;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const Vec r = pts[i] - pts.front();
    s += (r - r.dot(u) * u).norm();
  }
  return s / static_cast<double>(pts.size() - 2) / len;
}

double straightness(const Trajectory& traj, bool frame) {
  std::vector<Vec> pts;
  pts.reserve(traj.records.size());
  for (const auto& r : traj.records) pts.push_back(frame ? r.xbar : r.x);
  return straightness(pts);
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median: empty");
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

}  // namespace vfm::exp
