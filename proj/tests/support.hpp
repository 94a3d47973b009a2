#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

// Test-side randomness uses std::normal_distribution on purpose: it is a
// different generator from the library's, so oracles never share a stream
// with the code under test.
namespace testing_support {

inline Eigen::VectorXd gaussian(std::mt19937& gen, Eigen::Index n) {
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = nd(gen);
  return v;
}

inline Eigen::VectorXd unit(std::mt19937& gen, Eigen::Index n) {
  Eigen::VectorXd v = gaussian(gen, n);
  return v / v.norm();
}

// Random orthogonal matrix from the QR of a Gaussian matrix.
inline Eigen::MatrixXd rotation(std::mt19937& gen, Eigen::Index n) {
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) m.col(j) = gaussian(gen, n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

inline Eigen::VectorXd axis(Eigen::Index n, Eigen::Index k) { return Eigen::VectorXd::Unit(n, k); }

}  // namespace testing_support
