#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gass/error.hpp"

namespace gass {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kNormFloor = 1e-12;
inline constexpr double kRankTolerance = 1e-10;
inline constexpr double kOrthogonalityPrecondition = 1e-8;

/// A point on the unit sphere S^{d-1}.
///
/// Raw vectors become embeddings only through normalize() or from_unit(),
/// both of which enforce unit norm and d >= 2.
class Embedding {
 public:
  Embedding() = default;

  static Embedding from_unit(Vector v, double tol = 1e-9) {
    check_dim(v);
    const double n = v.norm();
    if (!(std::abs(n - 1.0) <= tol))
      throw Error(ErrorKind::InvalidArgument,
                  "vector norm " + std::to_string(n) + " is not 1 within tolerance");
    return Embedding(std::move(v));
  }

  const Vector& coords() const noexcept { return v_; }
  Eigen::Index dim() const noexcept { return v_.size(); }
  double operator[](Eigen::Index i) const { return v_[i]; }

  double dot(const Embedding& other) const { return v_.dot(other.v_); }
  double dot(const Vector& other) const { return v_.dot(other); }

  bool operator==(const Embedding& other) const {
    return v_.size() == other.v_.size() && v_ == other.v_;
  }

 private:
  explicit Embedding(Vector v) : v_(std::move(v)) {}

  static void check_dim(const Vector& v) {
    if (v.size() < 2)
      throw Error(ErrorKind::DimensionTooSmall, "embedding dimension must be >= 2");
  }

  friend Embedding normalize(const Vector& v, double eps);

  Vector v_;
};

/// Scale v onto the unit sphere. Throws NearZeroVector when ||v|| <= eps.
inline Embedding normalize(const Vector& v, double eps = kNormFloor) {
  Embedding::check_dim(v);
  const double n = v.norm();
  if (!(n > eps))
    throw Error(ErrorKind::NearZeroVector, "cannot normalize vector of norm " + std::to_string(n));
  return Embedding(v / n);
}

using OrthonormalBasis = std::vector<Embedding>;

namespace detail {

// Remove the components of v along every vector in basis (modified
// Gram-Schmidt: one vector at a time, using the updated v).
inline void project_out(Vector& v, std::span<const Embedding> basis) {
  for (const auto& u : basis) v -= u.dot(v) * u.coords();
}

}  // namespace detail

/// Orthonormalize seeds against an optional existing basis.
///
/// Each seed is swept twice against `against` and the vectors already
/// produced, which keeps pairwise dot products at round-off level even for
/// nearly dependent seeds. A seed whose residual norm falls to 1e-10 or
/// below throws RankDeficient.
inline OrthonormalBasis gram_schmidt(std::span<const Vector> seeds,
                                     std::span<const Embedding> against = {}) {
  if (seeds.empty()) return {};
  const auto d = seeds.front().size();
  for (const auto& u : against)
    if (u.dim() != d) throw Error(ErrorKind::DimensionMismatch, "basis and seed dimensions differ");
  if (static_cast<Eigen::Index>(seeds.size() + against.size()) > d)
    throw Error(ErrorKind::DimensionTooSmall, "more basis vectors requested than dimensions");

  OrthonormalBasis out;
  out.reserve(seeds.size());
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    if (seeds[k].size() != d) throw Error(ErrorKind::DimensionMismatch, "seed dimensions differ");
    Vector v = seeds[k];
    for (int pass = 0; pass < 2; ++pass) {
      detail::project_out(v, against);
      detail::project_out(v, out);
    }
    if (!(v.norm() > kRankTolerance))
      throw Error(ErrorKind::RankDeficient, "seed " + std::to_string(k) + " is linearly dependent");
    out.push_back(normalize(v));
  }
  return out;
}

inline OrthonormalBasis gram_schmidt(const std::vector<Vector>& seeds,
                                     const OrthonormalBasis& against = {}) {
  return gram_schmidt(std::span<const Vector>(seeds), std::span<const Embedding>(against));
}

/// Orthogonal projection of v onto span(basis).
inline Vector project(std::span<const Embedding> basis, const Vector& v) {
  Vector out = Vector::Zero(v.size());
  for (const auto& u : basis) out += u.dot(v) * u.coords();
  return out;
}

/// Split of an embedding into its e_t coefficient, its u_ind coefficient
/// and the residual orthogonal to both.
struct Decomposition {
  double coeff_dep = 0.0;
  double coeff_ind = 0.0;
  Vector residual;
};

namespace detail {

inline void require_orthogonal_pair(const Embedding& anchor, const Embedding& u_ind) {
  if (anchor.dim() != u_ind.dim())
    throw Error(ErrorKind::DimensionMismatch, "anchor and u_ind dimensions differ");
  const double c = anchor.dot(u_ind);
  if (!(std::abs(c) <= kOrthogonalityPrecondition))
    throw Error(ErrorKind::NonOrthogonalBasis,
                "anchor . u_ind = " + std::to_string(c) + " exceeds 1e-8");
}

}  // namespace detail

inline Decomposition decompose(const Vector& e, const Embedding& anchor, const Embedding& u_ind) {
  detail::require_orthogonal_pair(anchor, u_ind);
  if (e.size() != anchor.dim())
    throw Error(ErrorKind::DimensionMismatch, "embedding and anchor dimensions differ");
  Decomposition dec;
  dec.coeff_dep = anchor.dot(e);
  dec.coeff_ind = u_ind.dot(e);
  dec.residual = e - dec.coeff_dep * anchor.coords() - dec.coeff_ind * u_ind.coords();
  return dec;
}

inline Decomposition decompose(const Embedding& e, const Embedding& anchor,
                               const Embedding& u_ind) {
  return decompose(e.coords(), anchor, u_ind);
}

inline Vector recompose(const Decomposition& dec, const Embedding& anchor,
                        const Embedding& u_ind) {
  detail::require_orthogonal_pair(anchor, u_ind);
  if (dec.residual.size() != anchor.dim())
    throw Error(ErrorKind::DimensionMismatch, "residual and anchor dimensions differ");
  return dec.coeff_dep * anchor.coords() + dec.coeff_ind * u_ind.coords() + dec.residual;
}

}  // namespace gass
