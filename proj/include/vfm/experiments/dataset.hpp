#pragma once

#include <cstdint>

#include "vfm/gmm.hpp"
#include "vfm/types.hpp"

namespace vfm::exp {

// Three-component 2D data mixture and two-component 2D latent mixture,
// uniform weights.
GaussianMixture toy_p0();
GaussianMixture toy_p1();

// Smooth single-Gaussian endpoints used for convergence studies.
GaussianMixture gaussian_p0();
GaussianMixture gaussian_p1();

struct DatasetSpec {
  GaussianMixture p0 = toy_p0();
  GaussianMixture p1 = toy_p1();
  std::size_t n = 30000;
  std::uint64_t seed = 0;
};

struct Dataset {
  Batch p0;
  Batch p1;
};

// p0 and p1 use distinct streams derived from spec.seed.
Dataset make_toy(const DatasetSpec& spec);

}  // namespace vfm::exp
