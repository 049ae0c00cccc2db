#include "vfm/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace vfm {

namespace {

// Solves L L^T y = r in place given the lower factor; also returns L^-1 r in z.
void chol_solve(const Mat& L, const double* r, double* z, double* y, std::size_t d) {
  for (std::size_t i = 0; i < d; ++i) {
    double s = r[i];
    for (std::size_t k = 0; k < i; ++k) s -= L(i, k) * z[k];
    z[i] = s / L(i, i);
  }
  for (std::size_t ii = d; ii-- > 0;) {
    double s = z[ii];
    for (std::size_t k = ii + 1; k < d; ++k) s -= L(k, ii) * y[k];
    y[ii] = s / L(ii, ii);
  }
}

Mat cholesky_or_throw(const Mat& c, const char* what) {
  Eigen::LLT<Mat> llt(c);
  if (llt.info() != Eigen::Success) throw std::invalid_argument(what);
  return llt.matrixL();
}

}  // namespace

void GaussianMixture::validate() const {
  const auto k = means.size();
  if (k == 0) throw std::invalid_argument("mixture: no components");
  if (static_cast<std::size_t>(weights.size()) != k || covs.size() != k)
    throw std::invalid_argument("mixture: weights/means/covs length mismatch");
  const auto d = dim();
  if (d == 0) throw std::invalid_argument("mixture: zero dimension");
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!(weights[i] >= 0.0)) throw std::invalid_argument("mixture: negative weight");
    total += weights[i];
    if (static_cast<std::size_t>(means[i].size()) != d)
      throw std::invalid_argument("mixture: mean dimension mismatch");
    if (static_cast<std::size_t>(covs[i].rows()) != d || static_cast<std::size_t>(covs[i].cols()) != d)
      throw std::invalid_argument("mixture: covariance shape mismatch");
    if (!covs[i].isApprox(covs[i].transpose(), 1e-12))
      throw std::invalid_argument("mixture: covariance not symmetric");
    cholesky_or_throw(covs[i], "mixture: covariance not positive definite");
  }
  if (std::fabs(total - 1.0) > 1e-12) throw std::invalid_argument("mixture: weights do not sum to 1");
}

GaussianMixture GaussianMixture::single(const Vec& mean, const Mat& cov) {
  GaussianMixture g;
  g.weights = Vec::Ones(1);
  g.means = {mean};
  g.covs = {cov};
  return g;
}

GaussianMixture marginal_mixture(const GaussianMixture& p0, const GaussianMixture& p1,
                                 const ScheduleValues& sv) {
  if (p0.dim() != p1.dim()) throw std::invalid_argument("marginal_mixture: dimension mismatch");
  GaussianMixture g;
  const auto n0 = p0.size(), n1 = p1.size();
  g.weights.resize(static_cast<Eigen::Index>(n0 * n1));
  for (std::size_t i = 0; i < n0; ++i) {
    for (std::size_t j = 0; j < n1; ++j) {
      g.weights[static_cast<Eigen::Index>(i * n1 + j)] = p0.weights[i] * p1.weights[j];
      g.means.push_back(sv.a * p0.means[i] + sv.sigma * p1.means[j]);
      g.covs.push_back(sv.a * sv.a * p0.covs[i] + sv.sigma * sv.sigma * p1.covs[j]);
    }
  }
  return g;
}

PosteriorOracle::PosteriorOracle(const GaussianMixture& p0, const GaussianMixture& p1,
                                 const ScheduleValues& sv)
    : sv_(sv), d_(p0.dim()) {
  if (p0.dim() != p1.dim()) throw std::invalid_argument("PosteriorOracle: dimension mismatch");
  const double half_d_log2pi = 0.5 * static_cast<double>(d_) * std::log(2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < p0.size(); ++i) {
    for (std::size_t j = 0; j < p1.size(); ++j) {
      Pair pr;
      const Mat c = sv.a * sv.a * p0.covs[i] + sv.sigma * sv.sigma * p1.covs[j];
      pr.chol = cholesky_or_throw(c, "PosteriorOracle: pair covariance not positive definite");
      double log_det = 0.0;
      for (std::size_t k = 0; k < d_; ++k) log_det += 2.0 * std::log(pr.chol(k, k));
      const double w = p0.weights[i] * p1.weights[j];
      pr.log_norm = (w > 0.0 ? std::log(w) : -INFINITY) - 0.5 * log_det - half_d_log2pi;
      pr.mean = sv.a * p0.means[i] + sv.sigma * p1.means[j];
      pr.gain0 = sv.a * p0.covs[i];
      pr.gain1 = sv.sigma * p1.covs[j];
      pr.mu0 = p0.means[i];
      pr.mu1 = p1.means[j];
      pairs_.push_back(std::move(pr));
    }
  }
}

void PosteriorOracle::solve_pairs(const double* x, double* logp, double* alpha,
                                  double* scratch) const {
  double* r = scratch;
  double* z = scratch + d_;
  for (std::size_t p = 0; p < pairs_.size(); ++p) {
    const auto& pr = pairs_[p];
    for (std::size_t k = 0; k < d_; ++k) r[k] = x[k] - pr.mean[k];
    double* y = alpha + p * d_;
    chol_solve(pr.chol, r, z, y, d_);
    double q = 0.0;
    for (std::size_t k = 0; k < d_; ++k) q += z[k] * z[k];
    logp[p] = pr.log_norm - 0.5 * q;
  }
}

namespace {

// Turns log weights into normalized responsibilities in place.
void softmax(double* lp, std::size_t n) {
  const double mx = *std::max_element(lp, lp + n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lp[i] = std::exp(lp[i] - mx);
    total += lp[i];
  }
  for (std::size_t i = 0; i < n; ++i) lp[i] /= total;
}

}  // namespace

void PosteriorOracle::moments(const Batch& x, Batch* x0, Batch* x1) const {
  if (static_cast<std::size_t>(x.cols()) != d_) throw std::invalid_argument("oracle: dimension mismatch");
  const auto np = pairs_.size();
  const auto n = x.rows();
  if (x0) x0->setZero(n, static_cast<Eigen::Index>(d_));
  if (x1) x1->setZero(n, static_cast<Eigen::Index>(d_));
  std::vector<double> logp(np), alpha(np * d_), scratch(2 * d_);
  for (Eigen::Index row = 0; row < n; ++row) {
    solve_pairs(x.row(row).data(), logp.data(), alpha.data(), scratch.data());
    softmax(logp.data(), np);
    for (std::size_t p = 0; p < np; ++p) {
      const auto& pr = pairs_[p];
      const double* y = alpha.data() + p * d_;
      const double r = logp[p];
      for (std::size_t k = 0; k < d_; ++k) {
        double g0 = pr.mu0[k], g1 = pr.mu1[k];
        for (std::size_t m = 0; m < d_; ++m) {
          g0 += pr.gain0(k, m) * y[m];
          g1 += pr.gain1(k, m) * y[m];
        }
        if (x0) (*x0)(row, k) += r * g0;
        if (x1) (*x1)(row, k) += r * g1;
      }
    }
  }
}

PosteriorMoments PosteriorOracle::moments(const Vec& x) const {
  Batch xb = x.transpose();
  Batch b0, b1;
  moments(xb, &b0, &b1);
  PosteriorMoments out;
  out.x0_given_t = b0.row(0).transpose();
  out.x1_given_t = b1.row(0).transpose();
  const auto np = pairs_.size();
  std::vector<double> logp(np), alpha(np * d_), scratch(2 * d_);
  solve_pairs(x.data(), logp.data(), alpha.data(), scratch.data());
  softmax(logp.data(), np);
  out.responsibilities = Eigen::Map<Vec>(logp.data(), static_cast<Eigen::Index>(np));
  return out;
}

Batch PosteriorOracle::velocity(const Batch& x) const {
  Batch x0, x1;
  moments(x, &x0, &x1);
  return sv_.a_dot * x0 + sv_.sigma_dot * x1;
}

Vec PosteriorOracle::velocity(const Vec& x) const {
  Batch xb = x.transpose();
  return velocity(xb).row(0).transpose();
}

Vec PosteriorOracle::score(const Vec& x) const {
  const auto np = pairs_.size();
  std::vector<double> logp(np), alpha(np * d_), scratch(2 * d_);
  solve_pairs(x.data(), logp.data(), alpha.data(), scratch.data());
  softmax(logp.data(), np);
  Vec s = Vec::Zero(static_cast<Eigen::Index>(d_));
  for (std::size_t p = 0; p < np; ++p)
    for (std::size_t k = 0; k < d_; ++k) s[k] -= logp[p] * alpha[p * d_ + k];
  return s;
}

PosteriorMoments posterior_moments(const GaussianMixture& p0, const GaussianMixture& p1,
                                   const ScheduleValues& sv, const Vec& x) {
  return PosteriorOracle(p0, p1, sv).moments(x);
}

Vec posterior_velocity(const GaussianMixture& p0, const GaussianMixture& p1,
                       const ScheduleValues& sv, const Vec& x) {
  return PosteriorOracle(p0, p1, sv).velocity(x);
}

Vec score(const GaussianMixture& p0, const GaussianMixture& p1, const ScheduleValues& sv,
          const Vec& x) {
  return PosteriorOracle(p0, p1, sv).score(x);
}

double log_density(const GaussianMixture& g, const Vec& x) {
  const auto d = g.dim();
  std::vector<double> lp(g.size());
  std::vector<double> z(d), y(d);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Mat L = cholesky_or_throw(g.covs[i], "log_density: covariance not positive definite");
    const Vec r = x - g.means[i];
    chol_solve(L, r.data(), z.data(), y.data(), d);
    double q = 0.0, log_det = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      q += z[k] * z[k];
      log_det += 2.0 * std::log(L(k, k));
    }
    lp[i] = std::log(g.weights[i]) - 0.5 * (q + log_det + static_cast<double>(d) * std::log(2.0 * std::numbers::pi));
  }
  const double mx = *std::max_element(lp.begin(), lp.end());
  double s = 0.0;
  for (double v : lp) s += std::exp(v - mx);
  return mx + std::log(s);
}

Batch sample_mixture(const GaussianMixture& g, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample_mixture: n must be >= 1");
  g.validate();
  const auto d = g.dim();
  std::vector<Mat> chol;
  for (const auto& c : g.covs) chol.push_back(cholesky_or_throw(c, "sample_mixture: bad covariance"));
  std::vector<double> cdf(g.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) cdf[i] = (acc += g.weights[i]);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Batch out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Vec z(static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < n; ++r) {
    const double u = unif(rng) * acc;
    std::size_t c = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    c = std::min(c, g.size() - 1);
    for (std::size_t k = 0; k < d; ++k) z[k] = normal(rng);
    out.row(r) = (g.means[c] + chol[c] * z).transpose();
  }
  return out;
}

nlohmann::json mixture_to_json(const GaussianMixture& g) {
  nlohmann::json j;
  j["weights"] = std::vector<double>(g.weights.data(), g.weights.data() + g.weights.size());
  auto& means = j["means"] = nlohmann::json::array();
  for (const auto& m : g.means) means.push_back(std::vector<double>(m.data(), m.data() + m.size()));
  auto& covs = j["covs"] = nlohmann::json::array();
  for (const auto& c : g.covs) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < c.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(c.cols()));
      for (Eigen::Index k = 0; k < c.cols(); ++k) row[static_cast<std::size_t>(k)] = c(r, k);
      rows.push_back(row);
    }
    covs.push_back(rows);
  }
  return j;
}

GaussianMixture mixture_from_json(const nlohmann::json& j) {
  GaussianMixture g;
  const auto w = j.at("weights").get<std::vector<double>>();
  g.weights = Eigen::Map<const Vec>(w.data(), static_cast<Eigen::Index>(w.size()));
  for (const auto& m : j.at("means")) {
    const auto v = m.get<std::vector<double>>();
    g.means.emplace_back(Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  for (const auto& c : j.at("covs")) {
    const auto rows = c.get<std::vector<std::vector<double>>>();
    Mat m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != static_cast<std::size_t>(m.cols()))
        throw std::invalid_argument("mixture: ragged covariance");
      for (std::size_t k = 0; k < rows[r].size(); ++k) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = rows[r][k];
    }
    g.covs.push_back(m);
  }
  g.validate();
  return g;
}

}  // namespace vfm
