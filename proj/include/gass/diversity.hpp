#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gass/error.hpp"
#include "gass/random.hpp"
#include "gass/sphere.hpp"

namespace gass {

inline constexpr int kDefaultCandidates = 10;
inline constexpr int kCandidateRedrawLimit = 100;
// Candidate energies closer than this to the maximum count as ties.
inline constexpr double kEnergyTieTolerance = 1e-12;

/// B member embeddings plus the text anchor e_t.
struct EmbeddingBatch {
  std::vector<Embedding> members;
  Embedding anchor;

  std::size_t size() const noexcept { return members.size(); }
  Eigen::Index dim() const noexcept { return anchor.dim(); }

  void validate() const {
    if (members.empty()) throw Error(ErrorKind::InvalidArgument, "batch must have B >= 1 members");
    for (const auto& m : members)
      if (m.dim() != anchor.dim())
        throw Error(ErrorKind::DimensionMismatch, "batch member and anchor dimensions differ");
  }
};

struct ProjectionCoord {
  double dep = 0.0;
  double ind = 0.0;
};

struct SpreadReport {
  double d_dep = 0.0;
  double d_ind = 0.0;
  double spp = 0.0;
  Embedding u_ind;
  std::vector<ProjectionCoord> proj_coords;
};

struct CandidateSet {
  OrthonormalBasis directions;
  std::vector<double> energies;
};

struct ResidualBasis {
  Embedding u_ind;
  std::size_t index = 0;
  CandidateSet candidates;
};

/// n mutually orthonormal directions in the tangent space of `anchor`.
///
/// Directions are i.i.d. Gaussian draws swept through Gram-Schmidt against
/// the anchor and the earlier candidates; a draw that collapses is redrawn
/// up to 100 times before RankDeficient.
inline OrthonormalBasis random_orthogonal_candidates(const Embedding& anchor, int n,
                                                     std::uint64_t seed) {
  const auto d = anchor.dim();
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "candidate count must be >= 0");
  if (n > d - 1)
    throw Error(ErrorKind::DimensionTooSmall, "cannot fit " + std::to_string(n) +
                                                  " tangent directions in dimension " +
                                                  std::to_string(d));
  Rng rng(seed);
  OrthonormalBasis against{anchor};
  OrthonormalBasis out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    for (int attempt = 0;; ++attempt) {
      std::vector<Vector> draw{rng.normal_vector(d)};
      try {
        auto next = gram_schmidt(draw, against);
        against.push_back(next.front());
        out.push_back(std::move(next.front()));
        break;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::RankDeficient || attempt + 1 >= kCandidateRedrawLimit) throw;
      }
    }
  }
  return out;
}

/// Mean absolute projection of the batch onto each candidate, and the
/// argmax with ties (within 1e-12) going to the lowest index.
inline ResidualBasis select_residual_basis(const EmbeddingBatch& batch, OrthonormalBasis candidates) {
  batch.validate();
  if (candidates.empty()) throw Error(ErrorKind::InvalidArgument, "candidate set is empty");
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  std::vector<double> energies(candidates.size(), 0.0);
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (candidates[k].dim() != batch.dim())
      throw Error(ErrorKind::DimensionMismatch, "candidate and batch dimensions differ");
    double sum = 0.0;
    for (const auto& m : batch.members) sum += std::abs(m.dot(candidates[k]));
    energies[k] = sum * inv_b;
  }
  const double best = *std::max_element(energies.begin(), energies.end());
  std::size_t index = 0;
  while (energies[index] < best - kEnergyTieTolerance) ++index;

  ResidualBasis out;
  out.u_ind = candidates[index];
  out.index = index;
  out.candidates = CandidateSet{std::move(candidates), std::move(energies)};
  return out;
}

inline ResidualBasis identify_residual_basis(const EmbeddingBatch& batch, int n,
                                             std::uint64_t seed) {
  batch.validate();
  return select_residual_basis(batch, random_orthogonal_candidates(batch.anchor, n, seed));
}

inline SpreadReport spread_score(const EmbeddingBatch& batch, const Embedding& u_ind) {
  batch.validate();
  detail::require_orthogonal_pair(batch.anchor, u_ind);

  SpreadReport report;
  report.u_ind = u_ind;
  report.proj_coords.reserve(batch.size());
  for (const auto& m : batch.members)
    report.proj_coords.push_back({m.dot(batch.anchor), m.dot(u_ind)});

  auto [dep_lo, dep_hi] = std::minmax_element(
      report.proj_coords.begin(), report.proj_coords.end(),
      [](const auto& a, const auto& b) { return a.dep < b.dep; });
  auto [ind_lo, ind_hi] = std::minmax_element(
      report.proj_coords.begin(), report.proj_coords.end(),
      [](const auto& a, const auto& b) { return a.ind < b.ind; });
  report.d_dep = dep_hi->dep - dep_lo->dep;
  report.d_ind = ind_hi->ind - ind_lo->ind;
  report.spp = report.d_dep + report.d_ind;
  return report;
}

// Batch-mean cosine with the anchor; the toy analog of CLIPScore.
inline double alignment_score(const EmbeddingBatch& batch) {
  batch.validate();
  double sum = 0.0;
  for (const auto& m : batch.members) sum += m.dot(batch.anchor);
  return sum / static_cast<double>(batch.size());
}

/// Vendi score: exp of the Shannon entropy of the eigenvalues of K/B with
/// K_ij = e_i . e_j. Negative round-off eigenvalues clamp to zero.
inline double vendi_score(const EmbeddingBatch& batch) {
  batch.validate();
  const auto b = static_cast<Eigen::Index>(batch.size());
  Matrix kernel(b, b);
  for (Eigen::Index i = 0; i < b; ++i)
    for (Eigen::Index j = i; j < b; ++j)
      kernel(i, j) = kernel(j, i) = batch.members[i].dot(batch.members[j]);
  kernel /= static_cast<double>(b);

  Eigen::SelfAdjointEigenSolver<Matrix> solver(kernel, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::NumericalError, "kernel eigendecomposition failed");
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const double lambda = std::max(solver.eigenvalues()[i], 0.0);
    if (lambda > 0.0) entropy -= lambda * std::log(lambda);
  }
  // Round-off can push the value a few ulps outside [1, B].
  return std::clamp(std::exp(entropy), 1.0, static_cast<double>(b));
}

}  // namespace gass
