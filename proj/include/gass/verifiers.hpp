#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "gass/diversity.hpp"
#include "gass/expansion.hpp"
#include "gass/random.hpp"
#include "gass/sphere.hpp"
#include "gass/volume.hpp"

namespace gass::volume {

/// Outcome of a brute-force property check. `values` holds the numbers
/// the check was decided on, keyed by name.
struct VerifierReport {
  std::string name;
  bool pass = false;
  std::map<std::string, double> values;
};

// det(G + dG) >= det(G), up to 1e-12 relative.
inline bool determinant_increase_holds(const Matrix& g, const Matrix& delta) {
  const double base = psd_determinant(g);
  return psd_determinant(g + delta) >= base - 1e-12 * std::abs(base);
}

/// Random positive-definite G = M^T M + 1e-6 I and positive semi-definite
/// dG = P^T P; counts the trials where the determinant does not decrease.
inline VerifierReport verify_determinant_monotonicity(int dim, std::size_t trials,
                                                      std::uint64_t seed) {
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "dim must be >= 1");
  std::size_t passes = 0;
  double worst_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, {stream::kTrial, t}));
    const Matrix m = rng.normal_matrix(dim, dim);
    const Matrix p = rng.normal_matrix(dim, dim);
    const Matrix g = m.transpose() * m + 1e-6 * Matrix::Identity(dim, dim);
    const Matrix delta = p.transpose() * p;
    if (determinant_increase_holds(g, delta)) ++passes;
    worst_ratio = std::min(worst_ratio, psd_determinant(g + delta) / psd_determinant(g));
  }
  VerifierReport r{"thm-a2", passes == trials, {}};
  r.values["dim"] = dim;
  r.values["trials"] = static_cast<double>(trials);
  r.values["passes"] = static_cast<double>(passes);
  r.values["violations"] = static_cast<double>(trials - passes);
  if (trials > 0) r.values["min_det_ratio"] = worst_ratio;
  return r;
}

inline constexpr double kProjectionLinearityTolerance = 1e-10;

/// Projection linearity on random orthonormal subspaces:
/// P(x + dx) - P(y + dy) against P(x - y) + P(dx - dy).
inline VerifierReport verify_projection_commutativity(int dim, int subspace_dim, std::size_t trials,
                                                      std::uint64_t seed) {
  if (subspace_dim < 1 || subspace_dim > dim)
    throw Error(ErrorKind::InvalidArgument, "need 1 <= subspace_dim <= dim");
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, {stream::kTrial, t}));
    std::vector<Vector> seeds;
    for (int k = 0; k < subspace_dim; ++k) seeds.push_back(rng.normal_vector(dim));
    const auto basis = gram_schmidt(seeds);
    const Vector x = rng.normal_vector(dim), y = rng.normal_vector(dim);
    const Vector dx = rng.normal_vector(dim), dy = rng.normal_vector(dim);
    const Vector lhs = project(basis, x + dx) - project(basis, y + dy);
    const Vector rhs = project(basis, x - y) + project(basis, dx - dy);
    worst = std::max(worst, (lhs - rhs).norm());
  }
  VerifierReport r{"lemma-a1", worst <= kProjectionLinearityTolerance, {}};
  r.values["dim"] = dim;
  r.values["subspace_dim"] = subspace_dim;
  r.values["trials"] = static_cast<double>(trials);
  r.values["max_discrepancy"] = worst;
  return r;
}

struct VolumeExpansionConfig {
  int batch_size = 4;
  int dim = 16;
  int n_candidates = kDefaultCandidates;
  ExpansionParams params{0.05, 0.05, true, 0};
  // Expected norm of each member's offset from the anchor before
  // normalization; small values give a prompt-consistent cluster.
  double spread = 0.2;
  std::uint64_t seed = 0;
};

inline constexpr int kDegenerateResampleLimit = 100;

/// Random batch clustered around a random anchor, its dominant residual
/// basis, and a Monte-Carlo estimate of the expected volume gain under
/// expansion. Passes when mean - 3 * stderr > 0.
///
/// Members are normalize(anchor + spread * g / sqrt(d)) with g standard
/// normal. The gain is second order in r relative to the edge lengths, so
/// widely spread batches (spread of order 1) need far more trials to
/// resolve it, and renormalization can make it negative.
inline VerifierReport verify_volume_expansion(const VolumeExpansionConfig& cfg, std::size_t trials) {
  const int b = cfg.batch_size, d = cfg.dim;
  if (b < 2 || b > d + 1) throw Error(ErrorKind::InvalidArgument, "need 2 <= B <= d + 1");
  if (!(cfg.spread > 0.0)) throw Error(ErrorKind::InvalidArgument, "spread must be > 0");
  // r_dep = r_ind = 0 is allowed: the gain is exactly 0 and the check reports a failure.
  cfg.params.validate();

  EmbeddingBatch batch;
  double v0 = 0.0;
  for (int attempt = 0;; ++attempt) {
    if (attempt >= kDegenerateResampleLimit)
      throw Error(ErrorKind::DegenerateBatch, "no non-degenerate batch after 100 draws");
    Rng rng(derive_seed(cfg.seed, {stream::kBatch, static_cast<std::uint64_t>(attempt)}));
    batch.anchor = normalize(rng.normal_vector(d));
    batch.members.clear();
    const double scale = cfg.spread / std::sqrt(static_cast<double>(d));
    for (int i = 0; i < b; ++i)
      batch.members.push_back(normalize(batch.anchor.coords() + scale * rng.normal_vector(d)));
    v0 = simplex_volume(batch.members);
    if (v0 > 1e-12) break;
  }
  const int n = std::min(cfg.n_candidates, d - 1);
  const auto basis = identify_residual_basis(batch, n, derive_seed(cfg.seed, {stream::kBasis}));
  const auto gain = expected_volume_gain_estimate(batch, basis.u_ind, cfg.params, trials);

  VerifierReport r{"prop41", gain.mean - 3.0 * gain.stderr_mean > 0.0, {}};
  r.values["batch_size"] = b;
  r.values["dim"] = d;
  r.values["r_dep"] = cfg.params.r_dep;
  r.values["r_ind"] = cfg.params.r_ind;
  r.values["spread"] = cfg.spread;
  r.values["trials"] = static_cast<double>(trials);
  r.values["original_volume"] = v0;
  r.values["mean_gain"] = gain.mean;
  r.values["stderr"] = gain.stderr_mean;
  r.values["negative_trials"] = static_cast<double>(gain.negative_trials);
  return r;
}

}  // namespace gass::volume
