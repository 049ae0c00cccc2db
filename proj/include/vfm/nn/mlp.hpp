#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "vfm/schedules.hpp"
#include "vfm/types.hpp"

namespace vfm::nn {

constexpr std::size_t kHidden = 100;

// Concat(x, t) -> Linear -> tanh -> Linear -> tanh -> Linear.
// Matrices are row-major, out x in.
struct MLPParams {
  std::size_t dim = 0;
  std::size_t hidden = kHidden;
  std::vector<double> W1, b1, W2, b2, W3, b3;

  static MLPParams zeros(std::size_t dim, std::size_t hidden = kHidden);
  // Uniform in +-1/sqrt(fan_in) per layer.
  static MLPParams init(std::size_t dim, std::uint64_t seed, std::size_t hidden = kHidden);

  std::array<std::vector<double>*, 6> blocks() { return {&W1, &b1, &W2, &b2, &W3, &b3}; }
  std::array<const std::vector<double>*, 6> blocks() const { return {&W1, &b1, &W2, &b2, &W3, &b3}; }
  std::size_t size() const;
  // Throws std::invalid_argument on inconsistent shapes.
  void validate() const;
};

// Rows of x paired with per-row times.
Batch mlp_forward(const MLPParams& p, const Batch& x, std::span<const double> t);
Batch mlp_forward(const MLPParams& p, const Batch& x, double t);
Vec mlp_forward(const MLPParams& p, const Vec& x, double t);

enum class LossKind { velocity_matching, noise_matching };

struct LossBatch {
  Batch x0;
  Batch x1;
  std::vector<double> t;
};

struct LossResult {
  double loss = 0.0;
  MLPParams grad;
};

using TimeWeight = std::function<double(double)>;

// Scratch buffers reused across calls to avoid reallocating per iteration.
struct Workspace {
  std::vector<double> input, wt, a1, a2, y, dy, dz2, dz1, dzt;
};

// Mean over the batch of lambda(t) * ||net(x_t, t) - target||^2.
LossResult loss_and_gradients(const MLPParams& p, const LossBatch& batch, const ScheduleId& schedule, LossKind kind,
                              const TimeWeight& lambda = {});
double loss_and_gradients(const MLPParams& p, const LossBatch& batch, const ScheduleId& schedule, LossKind kind,
                          const TimeWeight& lambda, Workspace& ws, MLPParams& grad);
double loss_only(const MLPParams& p, const LossBatch& batch, const ScheduleId& schedule, LossKind kind,
                 const TimeWeight& lambda = {});

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step_count = 0;
  MLPParams m, v;

  explicit AdamState(const MLPParams& like);
  void step(MLPParams& p, const MLPParams& grad, double lr);
};

}  // namespace vfm::nn
