#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "gradcheck.hpp"
#include "support.hpp"
#include "vfm/experiments/dataset.hpp"
#include "vfm/gmm.hpp"
#include "vfm/nn/checkpoint.hpp"
#include "vfm/nn/train.hpp"

using namespace vfm;
using namespace vfm::nn;
using testing_support::max_abs_diff;

namespace {

LossBatch make_batch(const GaussianMixture& p0, const GaussianMixture& p1, std::size_t n, std::size_t d,
                     std::uint64_t seed) {
  LossBatch b;
  b.x0 = sample_mixture(p0, n, seed).leftCols(static_cast<Eigen::Index>(d));
  b.x1 = sample_mixture(p1, n, seed + 1).leftCols(static_cast<Eigen::Index>(d));
  std::mt19937_64 rng(seed + 2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) b.t.push_back(u(rng));
  return b;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("vfm_test_" + name)).string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class ConstantSource final : public VelocitySource {
 public:
  explicit ConstantSource(Vec v) : v_(std::move(v)) {}
  FieldKind kind() const override { return FieldKind::velocity_model; }
  std::size_t dim() const override { return static_cast<std::size_t>(v_.size()); }
  Batch evaluate(const Batch& x, double) const override { return v_.transpose().replicate(x.rows(), 1); }

 private:
  Vec v_;
};

}  // namespace

TEST_CASE("mlp: shapes and zero network") {
  const auto p = MLPParams::zeros(2);
  CHECK(p.W1.size() == 300);
  CHECK(p.W2.size() == 10000);
  CHECK(p.W3.size() == 200);
  CHECK(p.size() == 300 + 100 + 10000 + 100 + 200 + 2);
  std::mt19937_64 rng(1);
  const Batch x = testing_support::random_batch(7, 2, rng, 5.0);
  CHECK(mlp_forward(p, x, 0.3).cwiseAbs().maxCoeff() == 0.0);

  auto bad = MLPParams::zeros(2);
  bad.W2.pop_back();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(mlp_forward(p, Batch(Batch::Zero(3, 1)), 0.1), std::invalid_argument);
  const std::vector<double> ts{0.1, 0.2};
  CHECK_THROWS_AS(mlp_forward(p, Batch(Batch::Zero(3, 2)), ts), std::invalid_argument);
}

TEST_CASE("mlp: initialisation bounds and determinism") {
  const auto p = MLPParams::init(2, 5);
  const double b1 = 1.0 / std::sqrt(3.0), b2 = 0.1;
  for (double w : p.W1) CHECK(std::fabs(w) <= b1);
  for (double w : p.W2) CHECK(std::fabs(w) <= b2);
  for (double w : p.W3) CHECK(std::fabs(w) <= b2);
  CHECK(MLPParams::init(2, 5).W2 == p.W2);
  CHECK(MLPParams::init(2, 6).W2 != p.W2);
}

TEST_CASE("mlp: batching invariance") {
  const auto p = MLPParams::init(2, 3);
  std::mt19937_64 rng(2);
  const Batch x = testing_support::random_batch(37, 2, rng, 3.0);
  std::vector<double> ts;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 37; ++i) ts.push_back(u(rng));
  const Batch all = mlp_forward(p, x, ts);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Vec one = mlp_forward(p, Vec(x.row(r).transpose()), ts[static_cast<std::size_t>(r)]);
    CHECK((one - all.row(r).transpose()).cwiseAbs().maxCoeff() <= 1e-14);
  }
  const Batch same_t = mlp_forward(p, x, 0.4);
  CHECK(same_t == mlp_forward(p, x, std::vector<double>(37, 0.4)));
}

TEST_CASE("mlp: saturation keeps the output bounded") {
  auto p = MLPParams::init(2, 4);
  for (double& w : p.W1) w *= 1000.0;
  std::mt19937_64 rng(3);
  const Batch x = testing_support::random_batch(20, 2, rng, 10.0);
  const Batch y = mlp_forward(p, x, 0.5);
  // hidden activations lie in [-1, 1], so |y_q| <= |b3_q| + sum_k |W3_qk|
  for (std::size_t q = 0; q < 2; ++q) {
    double bound = std::fabs(p.b3[q]);
    for (std::size_t k = 0; k < p.hidden; ++k) bound += std::fabs(p.W3[q * p.hidden + k]);
    CHECK(y.col(static_cast<Eigen::Index>(q)).cwiseAbs().maxCoeff() <= bound + 1e-12);
  }
  CHECK(y.allFinite());
}

TEST_CASE("gradients match extended-precision central differences") {
  const auto id = ScheduleId(ScheduleKind::third_degree);
  for (std::size_t d : {1u, 2u}) {
    for (auto kind : {LossKind::velocity_matching, LossKind::noise_matching}) {
      CAPTURE(d);
      CAPTURE(static_cast<int>(kind));
      const auto batch = make_batch(exp::gaussian_p0(), exp::gaussian_p1(), 16, d, 40 + d);
      const auto p = MLPParams::init(d, 17 + d);
      const auto g = testing_support::check_gradients(p, batch, id, kind);
      CAPTURE(g.worst_where);
      CHECK(g.coords == p.size());
      CHECK(g.worst_rel <= 1e-4);
    }
  }
}

TEST_CASE("loss: zero network and weighting") {
  const auto id = ScheduleId(ScheduleKind::rectified);
  const auto batch = make_batch(exp::toy_p0(), exp::toy_p1(), 64, 2, 3);
  const auto zero = MLPParams::zeros(2);
  // zero network: loss is the mean squared target, only b3 gets a gradient
  const auto r = loss_and_gradients(zero, batch, id, LossKind::noise_matching);
  CHECK(r.loss == doctest::Approx(batch.x1.rowwise().squaredNorm().mean()).epsilon(1e-13));
  for (std::size_t q = 0; q < 2; ++q)
    CHECK(r.grad.b3[q] == doctest::Approx(-2.0 * batch.x1.col(static_cast<Eigen::Index>(q)).mean()).epsilon(1e-13));
  for (double g : r.grad.W1) CHECK(g == 0.0);
  for (double g : r.grad.W2) CHECK(g == 0.0);

  // rectified velocity target is x1 - x0
  const auto v = loss_and_gradients(zero, batch, id, LossKind::velocity_matching);
  CHECK(v.loss == doctest::Approx((batch.x1 - batch.x0).rowwise().squaredNorm().mean()).epsilon(1e-13));

  const auto p = MLPParams::init(2, 8);
  const auto base = loss_and_gradients(p, batch, id, LossKind::velocity_matching);
  const auto twice = loss_and_gradients(p, batch, id, LossKind::velocity_matching, [](double) { return 2.0; });
  CHECK(twice.loss == doctest::Approx(2.0 * base.loss).epsilon(1e-14));
  CHECK(twice.grad.W2[123] == doctest::Approx(2.0 * base.grad.W2[123]).epsilon(1e-12));
  CHECK(loss_only(p, batch, id, LossKind::velocity_matching) == doctest::Approx(base.loss).epsilon(1e-14));

  LossBatch empty;
  empty.x0 = Batch(0, 2);
  empty.x1 = Batch(0, 2);
  CHECK_THROWS_AS(loss_and_gradients(p, empty, id, LossKind::noise_matching), std::invalid_argument);
}

TEST_CASE("loss: zero network on noise matching estimates E|x1|^2") {
  // p1: means (5,-5), (-5,3), identity covariances, equal weights
  const double expect = 2.0 + 0.5 * (50.0 + 34.0);
  const auto batch = make_batch(exp::toy_p0(), exp::toy_p1(), 200000, 2, 9);
  const double loss = loss_only(MLPParams::zeros(2), batch, ScheduleId(ScheduleKind::vp), LossKind::noise_matching);
  const Eigen::ArrayXd sq = batch.x1.rowwise().squaredNorm().array();
  const double sd = std::sqrt((sq - sq.mean()).square().mean());
  CHECK(std::fabs(loss - expect) <= 4.0 * sd / std::sqrt(200000.0));
}

TEST_CASE("loss: oracle velocity leaves exactly the conditional variance") {
  // E|target - v*|^2 = E|target|^2 - E|v*|^2 since v* = E[target | x_t]
  const auto id = ScheduleId(ScheduleKind::third_degree);
  const auto p0 = exp::toy_p0(), p1 = exp::toy_p1();
  const std::size_t n = 100000;
  const auto batch = make_batch(p0, p1, n, 2, 21);
  double resid = 0.0, tgt = 0.0, pred = 0.0;
  std::vector<double> r2(n), diff(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const auto sv = eval_schedule(id, batch.t[i]);
    const Vec x0 = batch.x0.row(r).transpose(), x1 = batch.x1.row(r).transpose();
    const Vec xt = sv.a * x0 + sv.sigma * x1;
    const Vec target = sv.a_dot * x0 + sv.sigma_dot * x1;
    Batch m0, m1;
    PosteriorOracle(p0, p1, sv).moments(Batch(xt.transpose()), &m0, &m1);
    const Vec v = (sv.a_dot * m0 + sv.sigma_dot * m1).row(0).transpose();
    r2[i] = (target - v).squaredNorm();
    diff[i] = target.squaredNorm() - v.squaredNorm();
    resid += r2[i];
    tgt += target.squaredNorm();
    pred += v.squaredNorm();
  }
  resid /= static_cast<double>(n);
  const double gap = (tgt - pred) / static_cast<double>(n);
  CHECK(resid > 0.0);
  // paired difference of the two estimators has mean zero
  double m = 0.0, s = 0.0;
  for (std::size_t i = 0; i < n; ++i) m += r2[i] - diff[i];
  m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) s += std::pow(r2[i] - diff[i] - m, 2);
  const double se = std::sqrt(s / static_cast<double>(n)) / std::sqrt(static_cast<double>(n));
  CHECK(std::fabs(resid - gap) <= 4.0 * se);
}

TEST_CASE("adam") {
  auto p = MLPParams::init(2, 1);
  const auto before = p;
  const auto batch = make_batch(exp::gaussian_p0(), exp::gaussian_p1(), 32, 2, 1);
  const auto g = loss_and_gradients(p, batch, ScheduleId(ScheduleKind::rectified), LossKind::velocity_matching);
  AdamState adam(p);
  CHECK(adam.m.W2.size() == p.W2.size());
  for (int i = 0; i < 3; ++i) adam.step(p, g.grad, 0.0);
  CHECK(p.W1 == before.W1);
  CHECK(p.W2 == before.W2);
  CHECK(p.b3 == before.b3);
  CHECK(adam.step_count == 3);

  // first step moves every coordinate by lr * g / (|g| + eps)
  auto q = before;
  AdamState fresh(q);
  fresh.step(q, g.grad, 0.01);
  for (std::size_t i = 0; i < q.W2.size(); i += 97) {
    const double gi = g.grad.W2[i];
    CHECK(q.W2[i] - before.W2[i] == doctest::Approx(-0.01 * gi / (std::fabs(gi) + 1e-8)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(fresh.step(q, MLPParams::zeros(1), 0.01), std::invalid_argument);
}

TEST_CASE("training: determinism and progress") {
  const auto ds = exp::make_toy({exp::toy_p0(), exp::toy_p1(), 2000, 4});
  TrainConfig cfg;
  cfg.iterations = 1200;
  cfg.batch = 128;
  cfg.n_data = 2000;
  cfg.seed = 7;
  const auto id = ScheduleId(ScheduleKind::rectified);
  const auto a = train(cfg, ds.p0, ds.p1, id);
  const auto b = train(cfg, ds.p0, ds.p1, id);
  CHECK(a.params.W2 == b.params.W2);
  CHECK(a.losses == b.losses);
  CHECK(a.losses.size() == 1200);
  CHECK(smoothed_loss(a.losses, 1200) < smoothed_loss(a.losses, 200));
  cfg.seed = 8;
  CHECK(train(cfg, ds.p0, ds.p1, id).params.W2 != a.params.W2);

  CHECK_THROWS_AS(smoothed_loss(a.losses, 100), std::invalid_argument);
  CHECK_THROWS_AS(smoothed_loss(a.losses, 1300), std::invalid_argument);
  cfg.lr = 0.0;
  CHECK_THROWS_AS(train(cfg, ds.p0, ds.p1, id), std::invalid_argument);
  cfg.lr = 0.003;
  cfg.n_data = 5000;
  CHECK_THROWS_AS(train(cfg, ds.p0, ds.p1, id), std::invalid_argument);
  TrainConfig zero_iters;
  zero_iters.iterations = 0;
  CHECK_THROWS_AS(zero_iters.validate(), std::invalid_argument);
}

TEST_CASE("network as a velocity source") {
  const auto p = MLPParams::init(2, 9);
  const MlpSource src(p, FieldKind::noise_model);
  std::mt19937_64 rng(4);
  const Batch x = testing_support::random_batch(5, 2, rng);
  CHECK(src.evaluate(x, 0.3) == mlp_forward(p, x, 0.3));
  CHECK(src.kind() == FieldKind::noise_model);
  CHECK_THROWS_AS(MlpSource(p, FieldKind::oracle), std::invalid_argument);
}

TEST_CASE("reflow of an already straight teacher keeps its velocity") {
  const auto rect = ScheduleId(ScheduleKind::rectified);
  Vec c(2);
  c << 1.5, -0.5;
  const TransformedField teacher(std::make_shared<ConstantSource>(c), rect, TransformKind::sc_interp_time_adjust, 1e-6);
  const Batch x1 = sample_mixture(exp::gaussian_p1(), 2000, 3);
  TrainConfig cfg;
  cfg.iterations = 600;
  cfg.batch = 128;
  cfg.n_data = 2000;
  const auto out = reflow(teacher, {Method::euler}, time_grid(10), cfg, x1);
  CHECK(max_abs_diff(out.x0, Batch(x1.rowwise() - c.transpose())) <= 1e-12);
  const MlpSource student(out.student.params, FieldKind::velocity_model);
  for (double t : {0.2, 0.5, 0.8}) {
    const Batch xt = (1.0 - t) * out.x0.topRows(200) + t * x1.topRows(200);
    const Batch v = student.evaluate(xt, t);
    CHECK((v.rowwise() - c.transpose()).rowwise().norm().mean() <= 0.05);
  }
}

TEST_CASE("checkpoints") {
  Checkpoint c{MLPParams::init(2, 12), ScheduleId(ScheduleKind::vp, {0.2, 15.0}), FieldKind::noise_model};
  const auto path = temp_path("ckpt.json"), again = temp_path("ckpt2.json");
  save_checkpoint(c, path);
  const auto loaded = load_checkpoint(path);
  save_checkpoint(loaded, again);
  CHECK(read_file(path) == read_file(again));
  CHECK(loaded.kind == FieldKind::noise_model);
  CHECK(loaded.schedule.kind == ScheduleKind::vp);
  CHECK(loaded.schedule.params.beta_max == 15.0);
  std::mt19937_64 rng(5);
  const Batch x = testing_support::random_batch(9, 2, rng);
  CHECK(mlp_forward(loaded.params, x, 0.6) == mlp_forward(c.params, x, 0.6));

  const auto text = read_file(path);
  CHECK_THROWS_AS(checkpoint_from_string(text.substr(0, text.size() / 2)), CheckpointError);
  CHECK_THROWS_AS(checkpoint_from_string("{}"), CheckpointError);
  auto wrong = nlohmann::json::parse(text);
  wrong["weights"]["W2"].erase(0);
  CHECK_THROWS_AS(checkpoint_from_string(wrong.dump()), CheckpointError);
  wrong = nlohmann::json::parse(text);
  wrong["version"] = 99;
  CHECK_THROWS_AS(checkpoint_from_string(wrong.dump()), CheckpointError);
  wrong = nlohmann::json::parse(text);
  wrong["field_kind"] = "bogus";
  CHECK_THROWS_AS(checkpoint_from_string(wrong.dump()), CheckpointError);
  CHECK_THROWS_AS(load_checkpoint(temp_path("does_not_exist.json")), CheckpointError);
  std::filesystem::remove(path);
  std::filesystem::remove(again);
}
