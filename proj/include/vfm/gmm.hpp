#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"

#include "vfm/schedules.hpp"
#include "vfm/types.hpp"

namespace vfm {

struct GaussianMixture {
  Vec weights;
  std::vector<Vec> means;
  std::vector<Mat> covs;

  std::size_t dim() const { return means.empty() ? 0 : static_cast<std::size_t>(means[0].size()); }
  std::size_t size() const { return means.size(); }
  // Throws std::invalid_argument on a malformed mixture.
  void validate() const;

  static GaussianMixture single(const Vec& mean, const Mat& cov);
};

struct PosteriorMoments {
  Vec x0_given_t;
  Vec x1_given_t;
  Vec responsibilities;  // over pairs (i, j), index i * |p1| + j
};

GaussianMixture marginal_mixture(const GaussianMixture& p0, const GaussianMixture& p1,
                                 const ScheduleValues& sv);

// Exact conditioning for independent p0 x p1 at a fixed time. Factorizes
// every pair covariance once so repeated queries at the same t are cheap.
class PosteriorOracle {
 public:
  PosteriorOracle(const GaussianMixture& p0, const GaussianMixture& p1, const ScheduleValues& sv);

  const ScheduleValues& values() const { return sv_; }
  std::size_t dim() const { return d_; }

  PosteriorMoments moments(const Vec& x) const;
  Vec velocity(const Vec& x) const;
  Vec score(const Vec& x) const;

  // Row-wise versions; any output pointer may be null.
  void moments(const Batch& x, Batch* x0, Batch* x1) const;
  Batch velocity(const Batch& x) const;

 private:
  struct Pair {
    double log_norm;   // log w - 0.5 log det C - 0.5 d log(2 pi)
    Vec mean;
    Mat chol;          // lower factor of C
    Mat gain0;         // a * Sigma0_i
    Mat gain1;         // sigma * Sigma1_j
    Vec mu0, mu1;
  };

  // Fills log weights and solved residuals C^-1 (x - m) for every pair.
  void solve_pairs(const double* x, double* logp, double* alpha, double* scratch) const;

  ScheduleValues sv_;
  std::size_t d_ = 0;
  std::vector<Pair> pairs_;
};

PosteriorMoments posterior_moments(const GaussianMixture& p0, const GaussianMixture& p1,
                                   const ScheduleValues& sv, const Vec& x);
Vec posterior_velocity(const GaussianMixture& p0, const GaussianMixture& p1,
                       const ScheduleValues& sv, const Vec& x);
Vec score(const GaussianMixture& p0, const GaussianMixture& p1, const ScheduleValues& sv,
          const Vec& x);

double log_density(const GaussianMixture& g, const Vec& x);

Batch sample_mixture(const GaussianMixture& g, std::size_t n, std::uint64_t seed);

nlohmann::json mixture_to_json(const GaussianMixture& g);
GaussianMixture mixture_from_json(const nlohmann::json& j);

}  // namespace vfm
