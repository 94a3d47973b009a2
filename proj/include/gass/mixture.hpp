#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "gass/error.hpp"
#include "gass/random.hpp"
#include "gass/sphere.hpp"

namespace gass {

/// Isotropic Gaussian mixture sum_k w_k N(mu_k, sigma0^2 I) in R^n.
struct GaussianMixture {
  std::vector<double> weights;
  std::vector<Vector> means;
  double component_std = 0.3;

  std::size_t components() const noexcept { return weights.size(); }
  Eigen::Index dim() const noexcept { return means.empty() ? 0 : means.front().size(); }

  void validate() const {
    if (weights.empty() || weights.size() != means.size())
      throw Error(ErrorKind::InvalidArgument, "mixture needs K >= 1 weights and as many means");
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(std::abs(total - 1.0) <= 1e-12))
      throw Error(ErrorKind::InvalidArgument, "mixture weights must sum to 1");
    for (double w : weights)
      if (!(w >= 0.0)) throw Error(ErrorKind::InvalidArgument, "mixture weights must be >= 0");
    for (const auto& m : means)
      if (m.size() != dim()) throw Error(ErrorKind::DimensionMismatch, "mixture means differ in size");
    if (!(component_std > 0.0)) throw Error(ErrorKind::InvalidArgument, "component_std must be > 0");
  }

  Vector global_mean() const {
    Vector mean = Vector::Zero(dim());
    for (std::size_t k = 0; k < components(); ++k) mean += weights[k] * means[k];
    return mean;
  }
};

/// Layout of a seeded toy mixture: component means scattered around a
/// shared center, so every mode is a variation on one "prompt".
struct MixtureLayout {
  int input_dim = 12;
  int components = 5;
  double component_std = 0.3;
  double center_norm = 8.0;
  double mean_spread = 0.5;
  std::uint64_t seed = 11;
};

inline GaussianMixture make_mixture(const MixtureLayout& layout) {
  if (layout.input_dim < 1 || layout.components < 1)
    throw Error(ErrorKind::InvalidArgument, "mixture needs n >= 1 and K >= 1");
  Rng rng(layout.seed);
  Vector center = rng.normal_vector(layout.input_dim);
  center *= layout.center_norm / std::max(center.norm(), kNormFloor);

  GaussianMixture mix;
  mix.component_std = layout.component_std;
  for (int k = 0; k < layout.components; ++k) {
    mix.weights.push_back(1.0 / layout.components);
    mix.means.push_back(center + layout.mean_spread * rng.normal_vector(layout.input_dim));
  }
  // Equal weights of 1/K need not sum to exactly 1 in floating point.
  const double total = std::accumulate(mix.weights.begin(), mix.weights.end(), 0.0);
  mix.weights.back() += 1.0 - total;
  mix.validate();
  return mix;
}

}  // namespace gass
