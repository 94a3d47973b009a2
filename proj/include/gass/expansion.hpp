#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gass/diversity.hpp"
#include "gass/error.hpp"
#include "gass/random.hpp"
#include "gass/sphere.hpp"
#include "gass/volume.hpp"

namespace gass {

inline constexpr double kDefaultExpansionRange = 0.02;

struct ExpansionParams {
  double r_dep = kDefaultExpansionRange;
  double r_ind = kDefaultExpansionRange;
  bool renormalize = true;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(std::isfinite(r_dep) && r_dep >= 0.0 && std::isfinite(r_ind) && r_ind >= 0.0))
      throw Error(ErrorKind::InvalidArgument, "expansion ranges must be finite and >= 0");
  }
};

struct ExpansionShift {
  double dep = 0.0;
  double ind = 0.0;
};

/// Perturbed targets. `targets` are unit vectors when renormalization is
/// on; with it off they equal `pre_norm_targets`.
struct ExpandedBatch {
  std::vector<Vector> targets;
  std::vector<Vector> pre_norm_targets;
  std::vector<ExpansionShift> shifts;
  std::vector<double> pre_norm_lengths;
};

/// Draw (delta_dep, delta_ind) for every member. Member i reads its own
/// substream derived from (seed, i), dep first then ind.
inline std::vector<ExpansionShift> draw_shifts(std::size_t members, const ExpansionParams& params) {
  params.validate();
  std::vector<ExpansionShift> shifts(members);
  for (std::size_t i = 0; i < members; ++i) {
    Rng rng(derive_seed(params.seed, {stream::kMember, i}));
    shifts[i].dep = rng.uniform(-params.r_dep, params.r_dep);
    shifts[i].ind = rng.uniform(-params.r_ind, params.r_ind);
  }
  return shifts;
}

/// Apply given shifts to the e_t / u_ind coefficients of every member.
///
/// This is the deterministic core of expand(); it is public so that
/// fixed shifts can be injected in tests.
inline ExpandedBatch expand_with_shifts(const EmbeddingBatch& batch, const Embedding& u_ind,
                                        std::span<const ExpansionShift> shifts, bool renormalize) {
  batch.validate();
  detail::require_orthogonal_pair(batch.anchor, u_ind);
  if (shifts.size() != batch.size())
    throw Error(ErrorKind::LengthMismatch, "one shift per batch member required");

  ExpandedBatch out;
  out.shifts.assign(shifts.begin(), shifts.end());
  out.targets.reserve(batch.size());
  out.pre_norm_targets.reserve(batch.size());
  out.pre_norm_lengths.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& source = batch.members[i];
    const auto& s = shifts[i];
    Vector pre;
    if (s.dep == 0.0 && s.ind == 0.0) {
      // Unshifted members keep their exact source coordinates.
      pre = source.coords();
    } else {
      auto dec = decompose(source, batch.anchor, u_ind);
      dec.coeff_dep += s.dep;
      dec.coeff_ind += s.ind;
      pre = recompose(dec, batch.anchor, u_ind);
    }
    const double length = pre.norm();
    if (!(length > kNormFloor))
      throw Error(ErrorKind::NearZeroVector,
                  "expanded target " + std::to_string(i) + " collapsed to the origin");
    out.pre_norm_lengths.push_back(length);
    if (!renormalize || (s.dep == 0.0 && s.ind == 0.0))
      out.targets.push_back(pre);
    else
      out.targets.push_back(pre / length);
    out.pre_norm_targets.push_back(std::move(pre));
  }
  return out;
}

inline ExpandedBatch expand(const EmbeddingBatch& batch, const Embedding& u_ind,
                            const ExpansionParams& params) {
  batch.validate();
  const auto shifts = draw_shifts(batch.size(), params);
  return expand_with_shifts(batch, u_ind, shifts, params.renormalize);
}

namespace detail {

// Neumaier summation; the result does not depend on trial scheduling.
inline double compensated_sum(std::span<const double> xs) {
  double sum = 0.0, c = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    c += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + c;
}

}  // namespace detail

struct VolumeGain {
  double mean = 0.0;
  double stderr_mean = 0.0;
  std::size_t negative_trials = 0;
  double original_volume = 0.0;
};

/// Monte-Carlo estimate of E[V(expanded)] - V(original).
///
/// Trial t expands with seed derive_seed(params.seed, {trial, t}).
/// Individual trials with negative gain are counted, not rejected: the
/// volume increase holds in expectation only.
inline VolumeGain expected_volume_gain_estimate(const EmbeddingBatch& batch, const Embedding& u_ind,
                                                const ExpansionParams& params, std::size_t trials) {
  batch.validate();
  params.validate();
  if (trials < 1) throw Error(ErrorKind::InvalidArgument, "trials must be >= 1");
  const auto b = static_cast<Eigen::Index>(batch.size());
  if (b < 2 || b > batch.dim() + 1)
    throw Error(ErrorKind::InvalidArgument, "volume gain needs 2 <= B <= d + 1");

  VolumeGain out;
  out.original_volume = volume::simplex_volume(batch.members);

  std::vector<double> gains;
  gains.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    ExpansionParams trial_params = params;
    trial_params.seed = derive_seed(params.seed, {stream::kTrial, t});
    const auto expanded = expand(batch, u_ind, trial_params);
    const double gain = volume::simplex_volume(expanded.targets) - out.original_volume;
    if (gain < 0.0) ++out.negative_trials;
    gains.push_back(gain);
  }
  const double n = static_cast<double>(trials);
  out.mean = detail::compensated_sum(gains) / n;
  if (trials > 1) {
    for (auto& g : gains) g = (g - out.mean) * (g - out.mean);
    out.stderr_mean = std::sqrt(detail::compensated_sum(gains) / (n - 1.0) / n);
  }
  return out;
}

}  // namespace gass
