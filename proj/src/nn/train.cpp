#include "vfm/nn/train.hpp"

#include <random>
#include <stdexcept>

namespace vfm::nn {

void TrainConfig::validate() const {
  if (iterations <= 0 || batch <= 0 || n_data == 0) throw std::invalid_argument("train: counts must be positive");
  if (!(lr > 0.0)) throw std::invalid_argument("train: lr must be positive");
}

TrainResult train(const TrainConfig& config, const Batch& p0, const Batch& p1, const ScheduleId& schedule) {
  config.validate();
  if (static_cast<std::size_t>(p0.rows()) < config.n_data || static_cast<std::size_t>(p1.rows()) < config.n_data)
    throw std::invalid_argument("train: fewer samples than n_data");
  if (p0.cols() != p1.cols()) throw std::invalid_argument("train: dimension mismatch");
  const auto d = static_cast<std::size_t>(p0.cols());
  const auto bs = static_cast<std::size_t>(config.batch);

  std::mt19937_64 rng(config.seed);
  TrainResult out;
  out.params = MLPParams::init(d, rng());
  AdamState adam(out.params);
  std::uniform_int_distribution<std::size_t> pick(0, config.n_data - 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  LossBatch lb{Batch(bs, d), Batch(bs, d), std::vector<double>(bs)};
  Workspace ws;
  MLPParams grad = MLPParams::zeros(d, out.params.hidden);
  out.losses.reserve(static_cast<std::size_t>(config.iterations));
  for (int it = 0; it < config.iterations; ++it) {
    for (std::size_t i = 0; i < bs; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const auto i0 = static_cast<Eigen::Index>(pick(rng));
      const auto i1 = config.coupled ? i0 : static_cast<Eigen::Index>(pick(rng));
      lb.x0.row(r) = p0.row(i0);
      lb.x1.row(r) = p1.row(i1);
      lb.t[i] = unif(rng);
    }
    out.losses.push_back(loss_and_gradients(out.params, lb, schedule, config.loss, config.lambda_t, ws, grad));
    adam.step(out.params, grad, config.lr);
  }
  return out;
}

double smoothed_loss(const std::vector<double>& losses, std::size_t end, std::size_t window) {
  if (end > losses.size() || end < window || window == 0) throw std::invalid_argument("smoothed_loss: bad window");
  double s = 0.0;
  for (std::size_t i = end - window; i < end; ++i) s += losses[i];
  return s / static_cast<double>(window);
}

MlpSource::MlpSource(MLPParams params, FieldKind kind) : params_(std::move(params)), kind_(kind) {
  params_.validate();
  if (kind == FieldKind::oracle) throw std::invalid_argument("MlpSource: a network cannot be the oracle");
}

Batch MlpSource::evaluate(const Batch& x, double t) const { return mlp_forward(params_, x, t); }

ReflowResult reflow(const TransformedField& teacher, const SolverMethod& method, const TimeGrid& grid,
                    TrainConfig config, const Batch& x1) {
  RunOptions opts;
  opts.keep_all_records = false;
  const auto res = run(teacher, grid, method, x1, opts);
  ReflowResult out;
  out.x0 = res.final_x();
  out.x1 = x1;
  for (Eigen::Index r = 0; r < out.x0.rows(); ++r)
    if (!out.x0.row(r).allFinite()) throw std::runtime_error("reflow: teacher produced non-finite samples");
  config.coupled = true;
  config.loss = LossKind::velocity_matching;
  config.n_data = std::min<std::size_t>(config.n_data, static_cast<std::size_t>(x1.rows()));
  out.student = train(config, out.x0, out.x1, ScheduleId(ScheduleKind::rectified));
  return out;
}

}  // namespace vfm::nn
