#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gass/embed_proxy.hpp"
#include "gass/error.hpp"
#include "gass/sphere.hpp"

namespace gass {

struct GuidanceConfig {
  double learning_rate = 1e-4;
  int max_steps = 60;
  double tolerance = 5e-4;
  int patience = 4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;

  void validate() const {
    if (!(learning_rate > 0.0)) throw Error(ErrorKind::InvalidArgument, "learning_rate must be > 0");
    if (max_steps < 1) throw Error(ErrorKind::InvalidArgument, "max_steps must be >= 1");
    if (patience < 1) throw Error(ErrorKind::InvalidArgument, "patience must be >= 1");
    if (!(tolerance >= 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be >= 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && eps_adam > 0.0))
      throw Error(ErrorKind::InvalidArgument, "invalid Adam moment parameters");
  }
};

enum class StopReason { MaxSteps, EarlyStop };

inline std::string_view to_string(StopReason r) {
  return r == StopReason::MaxSteps ? "max_steps" : "early_stop";
}

/// losses[0] is the loss before any update; losses[k] after update k.
struct OptimizationTrace {
  std::vector<double> losses;
  int steps_taken = 0;
  StopReason stop_reason = StopReason::MaxSteps;
  int best_step = 0;
};

inline double spp_loss(std::span<const Embedding> current, std::span<const Vector> targets) {
  if (current.size() != targets.size() || current.empty())
    throw Error(ErrorKind::LengthMismatch, "current and target batches must have equal size B >= 1");
  double loss = 0.0;
  for (std::size_t i = 0; i < current.size(); ++i) {
    if (targets[i].size() != current[i].dim())
      throw Error(ErrorKind::DimensionMismatch, "target dimension differs from embedding");
    loss += 1.0 - current[i].dot(targets[i]);
  }
  return loss;
}

inline double spp_loss(const std::vector<Embedding>& current, const std::vector<Vector>& targets) {
  return spp_loss(std::span<const Embedding>(current), std::span<const Vector>(targets));
}

struct OptimizationResult {
  std::vector<Vector> estimates;
  OptimizationTrace trace;
};

/// Adam on the clean-sample estimates against the SPP alignment loss.
///
/// Stops early once |loss_k - loss_{k-1}| < tolerance for `patience`
/// consecutive updates. Returns the lowest-loss iterate seen, so the
/// returned loss never exceeds the initial one. A later iterate replaces
/// the best only if it improves on it by more than round-off.
inline OptimizationResult optimize_estimates(std::vector<Vector> x_hats,
                                             std::span<const Vector> targets,
                                             const ProxyEncoder& enc, const GuidanceConfig& cfg) {
  cfg.validate();
  if (x_hats.size() != targets.size() || x_hats.empty())
    throw Error(ErrorKind::LengthMismatch, "estimates and targets must have equal size B >= 1");
  const std::size_t b = x_hats.size();

  std::vector<Vector> grads(b);
  auto evaluate = [&](const std::vector<Vector>& xs) {
    double loss = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
      if (targets[i].size() != enc.embed_dim())
        throw Error(ErrorKind::DimensionMismatch, "target dimension differs from embed_dim");
      loss += 1.0 - enc.encode(xs[i]).dot(targets[i]);
      grads[i] = enc.encode_gradient(xs[i], targets[i]);
    }
    return loss;
  };

  std::vector<Vector> m(b), v(b);
  for (std::size_t i = 0; i < b; ++i) {
    m[i] = Vector::Zero(x_hats[i].size());
    v[i] = Vector::Zero(x_hats[i].size());
  }

  OptimizationResult out;
  auto& trace = out.trace;
  trace.losses.push_back(evaluate(x_hats));
  out.estimates = x_hats;
  double best = trace.losses.back();
  // Each 1 - cos term carries a few ulp of round-off; smaller decreases are noise.
  const double resolution = 8.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(b);
  int stalled = 0;
  double beta1_pow = 1.0, beta2_pow = 1.0;

  for (int k = 1; k <= cfg.max_steps; ++k) {
    beta1_pow *= cfg.beta1;
    beta2_pow *= cfg.beta2;
    for (std::size_t i = 0; i < b; ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grads[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grads[i].cwiseProduct(grads[i]);
      const Vector m_hat = m[i] / (1.0 - beta1_pow);
      const Vector v_hat = v[i] / (1.0 - beta2_pow);
      x_hats[i].array() -= cfg.learning_rate * m_hat.array() / (v_hat.array().sqrt() + cfg.eps_adam);
    }
    const double loss = evaluate(x_hats);
    const double change = std::abs(loss - trace.losses.back());
    trace.losses.push_back(loss);
    trace.steps_taken = k;
    if (loss < best - resolution) {
      best = loss;
      out.estimates = x_hats;
      trace.best_step = k;
    }
    stalled = change < cfg.tolerance ? stalled + 1 : 0;
    if (stalled >= cfg.patience) {
      trace.stop_reason = StopReason::EarlyStop;
      break;
    }
  }
  return out;
}

inline OptimizationResult optimize_estimates(const std::vector<Vector>& x_hats,
                                             const std::vector<Vector>& targets,
                                             const ProxyEncoder& enc, const GuidanceConfig& cfg) {
  return optimize_estimates(x_hats, std::span<const Vector>(targets), enc, cfg);
}

}  // namespace gass
