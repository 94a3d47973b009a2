#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gass/diversity.hpp"
#include "gass/embed_proxy.hpp"
#include "gass/error.hpp"
#include "gass/expansion.hpp"
#include "gass/guidance.hpp"
#include "gass/mixture.hpp"
#include "gass/random.hpp"
#include "gass/sphere.hpp"

namespace gass {

/// Variance-preserving schedule: x_t = sqrt(abar_t) x_0 + sqrt(1 - abar_t) eps,
/// with abar_0 = 1 and abar strictly decreasing to abar_T.
struct NoiseSchedule {
  std::vector<double> alpha_bars;  // indexed 0..T

  static NoiseSchedule linear(int total_steps, double alpha_bar_min = 0.01) {
    if (total_steps < 1) throw Error(ErrorKind::InvalidArgument, "schedule needs T >= 1");
    if (!(alpha_bar_min > 0.0 && alpha_bar_min < 1.0))
      throw Error(ErrorKind::InvalidArgument, "alpha_bar_min must lie in (0, 1)");
    NoiseSchedule s;
    s.alpha_bars.resize(total_steps + 1);
    for (int t = 0; t <= total_steps; ++t)
      s.alpha_bars[t] = 1.0 - (1.0 - alpha_bar_min) * static_cast<double>(t) / total_steps;
    return s;
  }

  int total_steps() const noexcept { return static_cast<int>(alpha_bars.size()) - 1; }
  double alpha_bar(int t) const { return alpha_bars.at(t); }
  double sigma(int t) const { return std::sqrt(std::max(0.0, 1.0 - alpha_bars.at(t))); }

  void validate() const {
    if (alpha_bars.size() < 2) throw Error(ErrorKind::InvalidArgument, "schedule needs T >= 1");
    if (!(std::abs(alpha_bars.front() - 1.0) <= 1e-9))
      throw Error(ErrorKind::InvalidArgument, "schedule must start at alpha_bar = 1");
    for (std::size_t t = 1; t < alpha_bars.size(); ++t)
      if (!(alpha_bars[t] < alpha_bars[t - 1] && alpha_bars[t] > 0.0))
        throw Error(ErrorKind::InvalidArgument, "alpha_bar must be strictly decreasing in (0, 1]");
  }
};

/// Posterior mean E[x_0 | x_t] for a Gaussian mixture under the forward
/// kernel. Responsibilities use log-sum-exp, so the result is finite for
/// any finite x_t.
inline Vector predict_x0(const GaussianMixture& mix, const NoiseSchedule& schedule, const Vector& x_t,
                         int t) {
  if (t < 0 || t > schedule.total_steps())
    throw Error(ErrorKind::InvalidArgument, "step outside the schedule");
  if (x_t.size() != mix.dim()) throw Error(ErrorKind::DimensionMismatch, "x_t dimension differs");
  const double sigma = schedule.sigma(t);
  if (sigma == 0.0) return x_t;

  const double a = schedule.alpha_bar(t);
  const double sqrt_a = std::sqrt(a);
  const double s0_sq = mix.component_std * mix.component_std;
  const double marginal_var = a * s0_sq + sigma * sigma;

  const auto k_count = mix.components();
  std::vector<double> logits(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    const double dist_sq = (x_t - sqrt_a * mix.means[k]).squaredNorm();
    logits[k] = (mix.weights[k] > 0.0 ? std::log(mix.weights[k])
                                      : -std::numeric_limits<double>::infinity()) -
                0.5 * dist_sq / marginal_var;
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double norm = 0.0;
  for (auto& l : logits) norm += (l = std::exp(l - top));

  Vector out = Vector::Zero(x_t.size());
  for (std::size_t k = 0; k < k_count; ++k) {
    if (logits[k] == 0.0) continue;
    const Vector m_k = (sigma * sigma * mix.means[k] + sqrt_a * s0_sq * x_t) / marginal_var;
    out += (logits[k] / norm) * m_k;
  }
  return out;
}

/// Deterministic (DDIM-form) transition x_t -> x_{t-1} driven by x0_hat:
/// x_{t-1} = sqrt(abar_{t-1}) x0_hat + sigma_{t-1} (x_t - sqrt(abar_t) x0_hat) / sigma_t.
inline Vector reverse_step(const NoiseSchedule& schedule, const Vector& x_t, const Vector& x0_hat,
                           int t) {
  if (t < 1 || t > schedule.total_steps())
    throw Error(ErrorKind::InvalidArgument, "reverse_step needs 1 <= t <= T");
  if (x_t.size() != x0_hat.size())
    throw Error(ErrorKind::DimensionMismatch, "x_t and x0_hat dimensions differ");
  const double sigma = schedule.sigma(t);
  if (!(sigma > 1e-12)) throw Error(ErrorKind::ZeroSigma, "sigma_t vanishes at t >= 1");
  const Vector eps_hat = (x_t - std::sqrt(schedule.alpha_bar(t)) * x0_hat) / sigma;
  return std::sqrt(schedule.alpha_bar(t - 1)) * x0_hat + schedule.sigma(t - 1) * eps_hat;
}

/// Timesteps t (transition x_t -> x_{t-1}) at which GASS intervenes.
struct GassInterval {
  std::vector<int> steps;  // ascending, unique

  bool contains(int t) const { return std::binary_search(steps.begin(), steps.end(), t); }

  void validate(int total_steps) const {
    for (std::size_t i = 0; i < steps.size(); ++i) {
      if (steps[i] < 1 || steps[i] >= total_steps)
        throw Error(ErrorKind::InvalidArgument, "GASS steps must satisfy 1 <= t < T");
      if (i > 0 && steps[i] <= steps[i - 1])
        throw Error(ErrorKind::InvalidArgument, "GASS steps must be ascending and unique");
    }
  }

  /// The `count` steps in [1, T) closest to `center` (default T/2);
  /// ties go to the earlier step.
  static GassInterval around(int total_steps, int count, std::optional<double> center = std::nullopt) {
    const double c = center.value_or(total_steps / 2.0);
    std::vector<int> all;
    for (int t = 1; t < total_steps; ++t) all.push_back(t);
    std::stable_sort(all.begin(), all.end(),
                     [c](int a, int b) { return std::abs(a - c) < std::abs(b - c); });
    all.resize(std::min<std::size_t>(all.size(), static_cast<std::size_t>(std::max(count, 0))));
    std::sort(all.begin(), all.end());
    return {all};
  }
};

struct GassOptions {
  GassInterval interval;
  ExpansionParams expansion;
  GuidanceConfig guidance;
  int n_candidates = kDefaultCandidates;
  // Reuse one shift draw per member for every intervention step.
  bool hold_shifts = false;
};

/// Everything a sampler run needs besides the batch size and seed.
struct ToyModel {
  GaussianMixture mixture;
  NoiseSchedule schedule;
  ProxyEncoder encoder;
  TextAnchor anchor;
};

/// Candidate count actually used: at most d - 1 orthonormal tangent
/// directions exist.
inline int effective_candidates(int requested, int embed_dim) {
  if (requested < 1) throw Error(ErrorKind::InvalidArgument, "candidate count must be >= 1");
  return std::min(requested, embed_dim - 1);
}

struct BatchMetrics {
  double spp = 0.0;
  double d_dep = 0.0;
  double d_ind = 0.0;
  double vendi = 1.0;
  double alignment = 0.0;
  std::size_t u_ind_index = 0;
  std::vector<double> energies;
  std::vector<ProjectionCoord> proj_coords;
};

inline BatchMetrics measure_batch(const EmbeddingBatch& batch, int n_candidates, std::uint64_t seed) {
  const auto basis = identify_residual_basis(batch, n_candidates, seed);
  const auto spread = spread_score(batch, basis.u_ind);
  return {spread.spp,           spread.d_dep,         spread.d_ind,
          vendi_score(batch),   alignment_score(batch), basis.index,
          basis.candidates.energies, spread.proj_coords};
}

/// What happened at one intervention step.
struct StepRecord {
  int t = 0;
  BatchMetrics before;  // embeddings of the model's x0 predictions
  double target_spread_dep = 0.0;  // max - min of pre-norm e_t coefficients
  double target_spread_ind = 0.0;  // same along u_ind
  std::vector<double> pre_norm_lengths;
  std::vector<double> target_norms;
  OptimizationTrace trace;
};

struct SamplerState {
  std::vector<Vector> latents;
  int step = 0;
};

struct RunRecord {
  std::uint64_t seed = 0;
  bool gass = false;
  std::vector<StepRecord> steps;
  BatchMetrics final_metrics;
  std::vector<Embedding> final_embeddings;
  // Filled only when history is requested: latents x_T .. x_0 and the
  // x0 estimate actually used at each transition.
  std::vector<std::vector<Vector>> latent_history;
  std::vector<std::vector<Vector>> x0_history;
};

struct SampleResult {
  std::vector<Vector> samples;
  RunRecord record;
};

inline SamplerState initial_state(const ToyModel& model, int batch_size, std::uint64_t seed) {
  if (batch_size < 1) throw Error(ErrorKind::InvalidArgument, "batch size must be >= 1");
  SamplerState state;
  state.step = model.schedule.total_steps();
  for (int i = 0; i < batch_size; ++i) {
    Rng rng(derive_seed(seed, {stream::kInit, static_cast<std::uint64_t>(i)}));
    state.latents.push_back(rng.normal_vector(model.mixture.dim()));
  }
  return state;
}

namespace detail {

inline EmbeddingBatch embed_batch(const ToyModel& model, const std::vector<Vector>& xs) {
  EmbeddingBatch batch;
  batch.anchor = model.anchor.vector;
  batch.members.reserve(xs.size());
  for (const auto& x : xs) batch.members.push_back(model.encoder.encode(x));
  return batch;
}

inline double coefficient_range(const std::vector<Vector>& vs, const Embedding& axis) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& v : vs) {
    const double c = axis.dot(v);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  return hi - lo;
}

}  // namespace detail

/// Advance `state` to step 0, intervening at the steps in gass->interval.
///
/// At an intervention step the x0 predictions are encoded, u_ind is
/// re-identified from the current batch, targets are expanded, and the
/// predictions are optimized toward them before the transition.
inline SampleResult run_sampler(const ToyModel& model, SamplerState state,
                                const std::optional<GassOptions>& gass, std::uint64_t seed,
                                bool record_history = false) {
  model.schedule.validate();
  if (gass) gass->interval.validate(model.schedule.total_steps());
  if (state.step < 0 || state.step > model.schedule.total_steps())
    throw Error(ErrorKind::InvalidArgument, "sampler state step outside the schedule");

  SampleResult out;
  auto& record = out.record;
  record.seed = seed;
  record.gass = gass.has_value();
  if (record_history) record.latent_history.push_back(state.latents);

  const std::size_t b = state.latents.size();
  const int n_candidates =
      gass ? effective_candidates(gass->n_candidates, model.encoder.embed_dim()) : 0;
  for (int t = state.step; t >= 1; --t) {
    std::vector<Vector> x0(b);
    for (std::size_t i = 0; i < b; ++i)
      x0[i] = predict_x0(model.mixture, model.schedule, state.latents[i], t);

    if (gass && gass->interval.contains(t)) {
      StepRecord step;
      step.t = t;
      const auto batch = detail::embed_batch(model, x0);
      const auto basis = identify_residual_basis(
          batch, n_candidates,
          derive_seed(seed, {stream::kBasis, static_cast<std::uint64_t>(t)}));
      const auto spread = spread_score(batch, basis.u_ind);
      step.before = {spread.spp,         spread.d_dep,           spread.d_ind,
                     vendi_score(batch), alignment_score(batch), basis.index,
                     basis.candidates.energies, spread.proj_coords};

      ExpansionParams params = gass->expansion;
      params.seed = gass->hold_shifts
                        ? derive_seed(seed, {stream::kExpand})
                        : derive_seed(seed, {stream::kExpand, static_cast<std::uint64_t>(t)});
      const auto expanded = expand(batch, basis.u_ind, params);
      step.target_spread_dep = detail::coefficient_range(expanded.pre_norm_targets, batch.anchor);
      step.target_spread_ind = detail::coefficient_range(expanded.pre_norm_targets, basis.u_ind);
      step.pre_norm_lengths = expanded.pre_norm_lengths;
      for (const auto& target : expanded.targets) step.target_norms.push_back(target.norm());

      auto optimized = optimize_estimates(x0, expanded.targets, model.encoder, gass->guidance);
      x0 = std::move(optimized.estimates);
      step.trace = std::move(optimized.trace);
      record.steps.push_back(std::move(step));
    }

    for (std::size_t i = 0; i < b; ++i) {
      state.latents[i] = reverse_step(model.schedule, state.latents[i], x0[i], t);
      if (!state.latents[i].allFinite())
        throw Error(ErrorKind::NumericalDivergence,
                    "non-finite latent at step " + std::to_string(t - 1));
    }
    state.step = t - 1;
    if (record_history) {
      record.x0_history.push_back(std::move(x0));
      record.latent_history.push_back(state.latents);
    }
  }

  const auto final_batch = detail::embed_batch(model, state.latents);
  // Same candidate count and seed with or without GASS, so paired runs
  // are scored against the same candidate directions.
  record.final_metrics = measure_batch(
      final_batch, effective_candidates(kDefaultCandidates, model.encoder.embed_dim()),
      derive_seed(seed, {stream::kFinalBasis}));
  record.final_embeddings = final_batch.members;
  out.samples = std::move(state.latents);
  return out;
}

/// Seeded toy generation of `batch_size` samples, with optional GASS.
inline SampleResult sample_batch(const ToyModel& model, int batch_size,
                                 const std::optional<GassOptions>& gass, std::uint64_t seed,
                                 bool record_history = false) {
  return run_sampler(model, initial_state(model, batch_size, seed), gass, seed, record_history);
}

}  // namespace gass
