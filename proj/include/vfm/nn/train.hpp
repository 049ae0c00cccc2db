#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "vfm/nn/mlp.hpp"
#include "vfm/solvers.hpp"
#include "vfm/transforms.hpp"
#include "vfm/velocity.hpp"

namespace vfm::nn {

struct TrainConfig {
  LossKind loss = LossKind::velocity_matching;
  int iterations = 20000;
  int batch = 2048;
  double lr = 0.003;
  std::size_t n_data = 30000;
  std::uint64_t seed = 0;
  TimeWeight lambda_t;  // empty means constant 1
  // Pairs (x0[i], x1[i]) are drawn together instead of independently.
  bool coupled = false;

  void validate() const;
};

struct TrainResult {
  MLPParams params;
  std::vector<double> losses;  // one per iteration
};

// p0/p1 hold at least n_data rows each; only the first n_data are used.
TrainResult train(const TrainConfig& config, const Batch& p0, const Batch& p1, const ScheduleId& schedule);

// Mean of the losses in [end - window, end).
double smoothed_loss(const std::vector<double>& losses, std::size_t end, std::size_t window = 200);

// A trained network exposed as a velocity source.
class MlpSource final : public VelocitySource {
 public:
  MlpSource(MLPParams params, FieldKind kind);
  FieldKind kind() const override { return kind_; }
  std::size_t dim() const override { return params_.dim; }
  Batch evaluate(const Batch& x, double t) const override;
  const MLPParams& params() const { return params_; }

 private:
  MLPParams params_;
  FieldKind kind_;
};

struct ReflowResult {
  TrainResult student;
  Batch x0;  // teacher endpoints
  Batch x1;  // starting noise
};

// Integrates the teacher from x1 to t = 0 to build a deterministic coupling,
// then fits a fresh velocity model on the rectified schedule with target
// x1 - x0. config.coupled is forced on.
ReflowResult reflow(const TransformedField& teacher, const SolverMethod& method, const TimeGrid& grid,
                    TrainConfig config, const Batch& x1);

}  // namespace vfm::nn
