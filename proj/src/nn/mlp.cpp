#include "vfm/nn/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "vfm/kernels/kernels.hpp"

namespace vfm::nn {

namespace {

void transpose(const double* src, std::size_t rows, std::size_t cols, std::vector<double>& dst) {
  constexpr std::size_t tile = 32;
  dst.resize(rows * cols);
  for (std::size_t r0 = 0; r0 < rows; r0 += tile)
    for (std::size_t c0 = 0; c0 < cols; c0 += tile)
      for (std::size_t r = r0; r < std::min(rows, r0 + tile); ++r)
        for (std::size_t c = c0; c < std::min(cols, c0 + tile); ++c) dst[c * rows + r] = src[r * cols + c];
}

// Fills ws.a1, ws.a2, ws.y from ws.input (n x (d+1)).
void forward_ws(const MLPParams& p, std::size_t n, Workspace& ws) {
  const auto& K = kernels::active();
  const std::size_t d = p.dim, h = p.hidden, in = d + 1;
  ws.a1.resize(n * h);
  ws.a2.resize(n * h);
  ws.y.resize(n * d);
  transpose(p.W1.data(), h, in, ws.wt);
  K.gemm(n, in, h, ws.input.data(), in, ws.wt.data(), h, p.b1.data(), ws.a1.data(), h);
  K.tanh(ws.a1.data(), n * h);
  transpose(p.W2.data(), h, h, ws.wt);
  K.gemm(n, h, h, ws.a1.data(), h, ws.wt.data(), h, p.b2.data(), ws.a2.data(), h);
  K.tanh(ws.a2.data(), n * h);
  transpose(p.W3.data(), d, h, ws.wt);
  K.gemm(n, h, d, ws.a2.data(), h, ws.wt.data(), d, p.b3.data(), ws.y.data(), d);
}

void column_sums(const std::vector<double>& m, std::size_t rows, std::size_t cols, std::vector<double>& out) {
  out.assign(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[c] += m[r * cols + c];
}

void check_input(const MLPParams& p, const Batch& x, std::size_t nt) {
  if (static_cast<std::size_t>(x.cols()) != p.dim) throw std::invalid_argument("mlp: input dimension mismatch");
  if (nt != static_cast<std::size_t>(x.rows())) throw std::invalid_argument("mlp: one time per row required");
}

// Builds the (x_t, t) inputs and the regression targets for a loss batch.
void prepare(const MLPParams& p, const LossBatch& b, const ScheduleId& schedule, LossKind kind, Workspace& ws,
             std::vector<double>& target) {
  const std::size_t n = b.t.size(), d = p.dim;
  if (n == 0) throw std::invalid_argument("loss: empty batch");
  if (static_cast<std::size_t>(b.x0.rows()) != n || static_cast<std::size_t>(b.x1.rows()) != n ||
      static_cast<std::size_t>(b.x0.cols()) != d || static_cast<std::size_t>(b.x1.cols()) != d)
    throw std::invalid_argument("loss: batch shape mismatch");
  ws.input.resize(n * (d + 1));
  target.resize(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto sv = eval_schedule(schedule, b.t[i]);
    const auto r = static_cast<Eigen::Index>(i);
    for (std::size_t q = 0; q < d; ++q) {
      const auto c = static_cast<Eigen::Index>(q);
      const double x0 = b.x0(r, c), x1 = b.x1(r, c);
      ws.input[i * (d + 1) + q] = sv.a * x0 + sv.sigma * x1;
      target[i * d + q] = kind == LossKind::velocity_matching ? sv.a_dot * x0 + sv.sigma_dot * x1 : x1;
    }
    ws.input[i * (d + 1) + d] = b.t[i];
  }
}

}  // namespace

MLPParams MLPParams::zeros(std::size_t dim, std::size_t hidden) {
  MLPParams p;
  p.dim = dim;
  p.hidden = hidden;
  p.W1.assign(hidden * (dim + 1), 0.0);
  p.b1.assign(hidden, 0.0);
  p.W2.assign(hidden * hidden, 0.0);
  p.b2.assign(hidden, 0.0);
  p.W3.assign(dim * hidden, 0.0);
  p.b3.assign(dim, 0.0);
  return p;
}

MLPParams MLPParams::init(std::size_t dim, std::uint64_t seed, std::size_t hidden) {
  MLPParams p = zeros(dim, hidden);
  std::mt19937_64 rng(seed);
  auto fill = [&](std::vector<double>& v, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (double& x : v) x = u(rng);
  };
  fill(p.W1, dim + 1);
  fill(p.b1, dim + 1);
  fill(p.W2, hidden);
  fill(p.b2, hidden);
  fill(p.W3, hidden);
  fill(p.b3, hidden);
  return p;
}

std::size_t MLPParams::size() const {
  std::size_t s = 0;
  for (const auto* b : blocks()) s += b->size();
  return s;
}

void MLPParams::validate() const {
  const std::size_t h = hidden, d = dim;
  if (d == 0 || h == 0) throw std::invalid_argument("mlp: zero dimension");
  if (W1.size() != h * (d + 1) || b1.size() != h || W2.size() != h * h || b2.size() != h || W3.size() != d * h ||
      b3.size() != d)
    throw std::invalid_argument("mlp: parameter shapes inconsistent with dim/hidden");
}

Batch mlp_forward(const MLPParams& p, const Batch& x, std::span<const double> t) {
  p.validate();
  check_input(p, x, t.size());
  const std::size_t n = t.size(), d = p.dim;
  Workspace ws;
  ws.input.resize(n * (d + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t q = 0; q < d; ++q)
      ws.input[i * (d + 1) + q] = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(q));
    ws.input[i * (d + 1) + d] = t[i];
  }
  forward_ws(p, n, ws);
  return Eigen::Map<const Batch>(ws.y.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
}

Batch mlp_forward(const MLPParams& p, const Batch& x, double t) {
  const std::vector<double> ts(static_cast<std::size_t>(x.rows()), t);
  return mlp_forward(p, x, ts);
}

Vec mlp_forward(const MLPParams& p, const Vec& x, double t) {
  const Batch xb = x.transpose();
  return mlp_forward(p, xb, t).row(0).transpose();
}

double loss_and_gradients(const MLPParams& p, const LossBatch& batch, const ScheduleId& schedule, LossKind kind,
                          const TimeWeight& lambda, Workspace& ws, MLPParams& grad) {
  p.validate();
  const auto& K = kernels::active();
  const std::size_t n = batch.t.size(), d = p.dim, h = p.hidden, in = d + 1;
  std::vector<double>& target = ws.dy;  // overwritten below by the output gradient
  prepare(p, batch, schedule, kind, ws, target);
  forward_ws(p, n, ws);

  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = lambda ? lambda(batch.t[i]) : 1.0;
    double sq = 0.0;
    for (std::size_t q = 0; q < d; ++q) {
      const double r = ws.y[i * d + q] - target[i * d + q];
      sq += r * r;
      ws.dy[i * d + q] = 2.0 * w * r / static_cast<double>(n);
    }
    loss += w * sq;
  }
  loss /= static_cast<double>(n);

  if (grad.dim != d || grad.hidden != h) grad = MLPParams::zeros(d, h);

  // output layer
  transpose(ws.dy.data(), n, d, ws.dzt);
  K.gemm(d, n, h, ws.dzt.data(), n, ws.a2.data(), h, nullptr, grad.W3.data(), h);
  column_sums(ws.dy, n, d, grad.b3);
  ws.dz2.resize(n * h);
  K.gemm(n, d, h, ws.dy.data(), d, p.W3.data(), h, nullptr, ws.dz2.data(), h);
  for (std::size_t i = 0; i < n * h; ++i) ws.dz2[i] *= 1.0 - ws.a2[i] * ws.a2[i];

  // second hidden layer
  transpose(ws.dz2.data(), n, h, ws.dzt);
  K.gemm(h, n, h, ws.dzt.data(), n, ws.a1.data(), h, nullptr, grad.W2.data(), h);
  column_sums(ws.dz2, n, h, grad.b2);
  ws.dz1.resize(n * h);
  K.gemm(n, h, h, ws.dz2.data(), h, p.W2.data(), h, nullptr, ws.dz1.data(), h);
  for (std::size_t i = 0; i < n * h; ++i) ws.dz1[i] *= 1.0 - ws.a1[i] * ws.a1[i];

  // first layer
  transpose(ws.dz1.data(), n, h, ws.dzt);
  K.gemm(h, n, in, ws.dzt.data(), n, ws.input.data(), in, nullptr, grad.W1.data(), in);
  column_sums(ws.dz1, n, h, grad.b1);
  return loss;
}

LossResult loss_and_gradients(const MLPParams& p, const LossBatch& batch, const ScheduleId& schedule, LossKind kind,
                              const TimeWeight& lambda) {
  Workspace ws;
  LossResult out;
  out.loss = loss_and_gradients(p, batch, schedule, kind, lambda, ws, out.grad);
  return out;
}

double loss_only(const MLPParams& p, const LossBatch& batch, const ScheduleId& schedule, LossKind kind,
                 const TimeWeight& lambda) {
  p.validate();
  Workspace ws;
  std::vector<double> target;
  prepare(p, batch, schedule, kind, ws, target);
  const std::size_t n = batch.t.size(), d = p.dim;
  forward_ws(p, n, ws);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = lambda ? lambda(batch.t[i]) : 1.0;
    double sq = 0.0;
    for (std::size_t q = 0; q < d; ++q) {
      const double r = ws.y[i * d + q] - target[i * d + q];
      sq += r * r;
    }
    loss += w * sq;
  }
  return loss / static_cast<double>(n);
}

AdamState::AdamState(const MLPParams& like)
    : m(MLPParams::zeros(like.dim, like.hidden)), v(MLPParams::zeros(like.dim, like.hidden)) {}

void AdamState::step(MLPParams& p, const MLPParams& grad, double lr) {
  ++step_count;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
  auto pb = p.blocks();
  auto gb = grad.blocks();
  auto mb = m.blocks();
  auto vb = v.blocks();
  for (std::size_t k = 0; k < pb.size(); ++k) {
    auto& pv = *pb[k];
    const auto& gv = *gb[k];
    auto& mv = *mb[k];
    auto& vv = *vb[k];
    if (gv.size() != pv.size()) throw std::invalid_argument("adam: gradient shape mismatch");
    for (std::size_t i = 0; i < pv.size(); ++i) {
      mv[i] = beta1 * mv[i] + (1.0 - beta1) * gv[i];
      vv[i] = beta2 * vv[i] + (1.0 - beta2) * gv[i] * gv[i];
      pv[i] -= lr * (mv[i] / c1) / (std::sqrt(vv[i] / c2) + eps);
    }
  }
}

}  // namespace vfm::nn
