#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gass/error.hpp"
#include "gass/sphere.hpp"

namespace gass::volume {

/// Columns are the B-1 edges e_j - e_base, j != base.
struct EdgeMatrix {
  std::size_t base_index = 0;
  Matrix edges;
};

inline EdgeMatrix edge_matrix(std::span<const Vector> points, std::size_t base_index = 0) {
  if (points.size() < 2) throw Error(ErrorKind::TooFewPoints, "a simplex needs B >= 2 points");
  if (base_index >= points.size())
    throw Error(ErrorKind::InvalidArgument, "base_index out of range");
  const auto d = points.front().size();
  EdgeMatrix out{base_index, Matrix(d, static_cast<Eigen::Index>(points.size() - 1))};
  Eigen::Index col = 0;
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (points[j].size() != d) throw Error(ErrorKind::DimensionMismatch, "point dimensions differ");
    if (j == base_index) continue;
    out.edges.col(col++) = points[j] - points[base_index];
  }
  return out;
}

inline Matrix gram_matrix(const EdgeMatrix& a) { return a.edges.transpose() * a.edges; }

/// Determinant of a symmetric positive semi-definite matrix.
///
/// Cholesky when G is numerically positive definite, otherwise a
/// full-pivot LU, which handles the singular and near-singular cases.
inline double psd_determinant(const Matrix& g) {
  if (g.rows() == 0) return 1.0;
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() == Eigen::Success) {
    const auto diag = llt.matrixLLT().diagonal();
    double det = 1.0;
    for (Eigen::Index i = 0; i < diag.size(); ++i) det *= diag[i] * diag[i];
    return det;
  }
  return Eigen::FullPivLU<Matrix>(g).determinant();
}

inline double factorial(std::size_t n) {
  double f = 1.0;
  for (std::size_t k = 2; k <= n; ++k) f *= static_cast<double>(k);
  return f;
}

/// (B-1)-simplex volume sqrt(det(A^T A)) / (B-1)! over base-vertex edges.
///
/// Evaluated as prod |R_jj| from a Householder QR of A, which equals
/// sqrt(det(A^T A)) but keeps full relative precision near degeneracy.
inline double simplex_volume(std::span<const Vector> points, std::size_t base_index = 0) {
  const auto edges = edge_matrix(points, base_index);
  const auto k = edges.edges.cols();
  if (k > edges.edges.rows()) return 0.0;
  const Eigen::HouseholderQR<Matrix> qr(edges.edges);
  double vol = 1.0;
  for (Eigen::Index j = 0; j < k; ++j) vol *= std::abs(qr.matrixQR()(j, j));
  return vol / factorial(points.size() - 1);
}

inline double simplex_volume(std::span<const Embedding> points, std::size_t base_index = 0) {
  std::vector<Vector> raw;
  raw.reserve(points.size());
  for (const auto& p : points) raw.push_back(p.coords());
  return simplex_volume(std::span<const Vector>(raw), base_index);
}

inline double simplex_volume(const std::vector<Embedding>& points, std::size_t base_index = 0) {
  return simplex_volume(std::span<const Embedding>(points), base_index);
}

inline double simplex_volume(const std::vector<Vector>& points, std::size_t base_index = 0) {
  return simplex_volume(std::span<const Vector>(points), base_index);
}

}  // namespace gass::volume
