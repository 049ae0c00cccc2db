#include "vfm/experiments/dataset.hpp"

namespace vfm::exp {

namespace {

Mat m2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

Vec v2(double a, double b) { return Vec{{a, b}}; }

}  // namespace

GaussianMixture toy_p0() {
  GaussianMixture g;
  g.weights = Vec::Constant(3, 1.0 / 3.0);
  g.means = {v2(20, 20), v2(25, 10), v2(10, 26)};
  g.covs = {m2(0.36, 0.49, 0.49, 1.96), m2(1.69, -0.81, -0.81, 1.0), m2(1.44, 0.0, 0.0, 1.44)};
  return g;
}

GaussianMixture toy_p1() {
  GaussianMixture g;
  g.weights = Vec::Constant(2, 0.5);
  g.means = {v2(5, -5), v2(-5, 3)};
  g.covs = {Mat::Identity(2, 2), Mat::Identity(2, 2)};
  return g;
}

GaussianMixture gaussian_p0() { return GaussianMixture::single(v2(2.0, -1.0), m2(1.0, 0.3, 0.3, 0.5)); }

GaussianMixture gaussian_p1() { return GaussianMixture::single(v2(0.0, 0.0), Mat::Identity(2, 2)); }

Dataset make_toy(const DatasetSpec& spec) {
  return {sample_mixture(spec.p0, spec.n, spec.seed * 2 + 1), sample_mixture(spec.p1, spec.n, spec.seed * 2 + 2)};
}

}  // namespace vfm::exp
