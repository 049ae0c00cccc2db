#pragma once

#include <random>
#include <vector>

#include "vfm/gmm.hpp"
#include "vfm/schedules.hpp"
#include "vfm/types.hpp"

namespace testing_support {

inline std::vector<vfm::ScheduleId> all_schedules() {
  using vfm::ScheduleKind;
  return {vfm::ScheduleId(ScheduleKind::vp),        vfm::ScheduleId(ScheduleKind::sub_vp),
          vfm::ScheduleId(ScheduleKind::ve),        vfm::ScheduleId(ScheduleKind::rectified),
          vfm::ScheduleId(ScheduleKind::third_degree), vfm::ScheduleId(ScheduleKind::fifth_degree)};
}

inline vfm::Mat random_spd(std::size_t d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g;
  vfm::Mat m(d, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return scale * (m * m.transpose() / static_cast<double>(d) + 0.3 * vfm::Mat::Identity(d, d));
}

inline vfm::GaussianMixture random_mixture(std::size_t k, std::size_t d, std::mt19937_64& rng, double spread = 3.0) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.5, 1.5);
  vfm::GaussianMixture m;
  m.weights = vfm::Vec(k);
  for (std::size_t i = 0; i < k; ++i) {
    m.weights[static_cast<Eigen::Index>(i)] = u(rng);
    vfm::Vec mu(d);
    for (auto& v : mu) v = spread * g(rng);
    m.means.push_back(mu);
    m.covs.push_back(random_spd(d, rng));
  }
  m.weights /= m.weights.sum();
  return m;
}

inline vfm::Vec random_vec(std::size_t d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  vfm::Vec v(d);
  for (auto& x : v) x = g(rng);
  return v;
}

inline vfm::Batch random_batch(std::size_t n, std::size_t d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  vfm::Batch b(n, d);
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = g(rng);
  return b;
}

inline double max_abs_diff(const vfm::Batch& a, const vfm::Batch& b) { return (a - b).cwiseAbs().maxCoeff(); }
inline double max_abs_diff(const vfm::Vec& a, const vfm::Vec& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace testing_support
