#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gass/error.hpp"
#include "gass/mixture.hpp"
#include "gass/random.hpp"
#include "gass/sphere.hpp"
#include "gass/verifiers.hpp"

namespace gass {

inline constexpr double kEncoderEpsilon = 1e-8;

/// Toy joint-embedding encoder e(x) = W x / ||W x||.
///
/// W is d x n with orthonormal rows drawn from a seeded Gaussian; if the
/// draw is rank deficient the next seed is tried. `seed` records the one
/// that was used.
class ProxyEncoder {
 public:
  ProxyEncoder(int input_dim, int embed_dim, std::uint64_t seed, double epsilon = kEncoderEpsilon)
      : epsilon_(epsilon) {
    if (embed_dim < 2) throw Error(ErrorKind::DimensionTooSmall, "embed_dim must be >= 2");
    if (input_dim < embed_dim)
      throw Error(ErrorKind::DimensionTooSmall, "encoder needs input_dim >= embed_dim");
    requested_seed_ = seed;
    for (std::uint64_t s = seed;; ++s) {
      Rng rng(s);
      std::vector<Vector> rows;
      for (int r = 0; r < embed_dim; ++r) rows.push_back(rng.normal_vector(input_dim));
      try {
        const auto basis = gram_schmidt(rows);
        weight_.resize(embed_dim, input_dim);
        for (int r = 0; r < embed_dim; ++r) weight_.row(r) = basis[r].coords().transpose();
        seed_ = s;
        return;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::RankDeficient || s - seed >= 100) throw;
      }
    }
  }

  const Matrix& weight() const noexcept { return weight_; }
  int input_dim() const noexcept { return static_cast<int>(weight_.cols()); }
  int embed_dim() const noexcept { return static_cast<int>(weight_.rows()); }
  double epsilon() const noexcept { return epsilon_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t requested_seed() const noexcept { return requested_seed_; }

  Embedding encode(const Vector& x) const {
    const Vector y = image(x);
    return normalize(y, epsilon_);
  }

  /// Gradient of 1 - e(x) . target with respect to x:
  /// -W^T (target - e (e . target)) / ||W x||.
  Vector encode_gradient(const Vector& x, const Vector& target) const {
    const Vector y = image(x);
    if (target.size() != y.size())
      throw Error(ErrorKind::DimensionMismatch, "target dimension differs from embed_dim");
    const double len = y.norm();
    const Vector e = y / len;
    const Vector tangent = target - e * e.dot(target);
    return -(weight_.transpose() * tangent) / len;
  }

  Vector encode_gradient(const Vector& x, const Embedding& target) const {
    return encode_gradient(x, target.coords());
  }

 private:
  Vector image(const Vector& x) const {
    if (x.size() != weight_.cols())
      throw Error(ErrorKind::DimensionMismatch, "encoder input has the wrong dimension");
    Vector y = weight_ * x;
    const double len = y.norm();
    if (!(len > epsilon_))
      throw Error(ErrorKind::NearZeroImage, "||W x|| = " + std::to_string(len) + " is below epsilon");
    return y;
  }

  Matrix weight_;
  double epsilon_ = kEncoderEpsilon;
  std::uint64_t seed_ = 0;
  std::uint64_t requested_seed_ = 0;
};

struct TextAnchor {
  Embedding vector;
  std::string provenance;
};

/// Anchor e_t = encode(sum_k w_k mu_k), or encode(mu_k) when a component is
/// given.
inline TextAnchor make_text_anchor(const ProxyEncoder& enc, const GaussianMixture& mix,
                                   std::optional<std::size_t> component = std::nullopt) {
  mix.validate();
  if (component) {
    if (*component >= mix.components())
      throw Error(ErrorKind::InvalidArgument, "anchor component index out of range");
    return {enc.encode(mix.means[*component]),
            "encoded mean of component " + std::to_string(*component)};
  }
  return {enc.encode(mix.global_mean()), "encoded weighted mean of all mixture components"};
}

inline constexpr double kGradientCheckStep = 1e-5;
inline constexpr double kGradientCheckTolerance = 1e-5;

/// Closed-form gradient against central differences of 1 - e(x) . target,
/// over random (x, target) with a fresh encoder per case.
inline volume::VerifierReport verify_encode_gradient(int input_dim, int embed_dim, std::size_t cases,
                                                     std::uint64_t seed) {
  double worst = 0.0;
  for (std::size_t c = 0; c < cases; ++c) {
    const auto case_seed = derive_seed(seed, {stream::kTrial, c});
    ProxyEncoder enc(input_dim, embed_dim, case_seed);
    Rng rng(derive_seed(case_seed, {stream::kMember}));
    const Vector x = rng.normal_vector(input_dim);
    const Embedding target = normalize(rng.normal_vector(embed_dim));

    const Vector analytic = enc.encode_gradient(x, target);
    Vector numeric(input_dim);
    auto loss = [&](const Vector& v) { return 1.0 - enc.encode(v).dot(target); };
    for (int j = 0; j < input_dim; ++j) {
      Vector plus = x, minus = x;
      plus[j] += kGradientCheckStep;
      minus[j] -= kGradientCheckStep;
      numeric[j] = (loss(plus) - loss(minus)) / (2.0 * kGradientCheckStep);
    }
    const double scale = std::max({analytic.norm(), numeric.norm(), 1e-300});
    worst = std::max(worst, (analytic - numeric).norm() / scale);
  }
  volume::VerifierReport r{"gradcheck", worst <= kGradientCheckTolerance, {}};
  r.values["input_dim"] = input_dim;
  r.values["embed_dim"] = embed_dim;
  r.values["cases"] = static_cast<double>(cases);
  r.values["step"] = kGradientCheckStep;
  r.values["max_relative_error"] = worst;
  return r;
}

}  // namespace gass
