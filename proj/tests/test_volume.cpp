#include <random>

#include <gtest/gtest.h>

#include "gass/verifiers.hpp"
#include "gass/volume.hpp"
#include "support.hpp"

using namespace gass;
using namespace gass::volume;
namespace ts = testing_support;

TEST(SimplexVolume, TwoPointsIsChordLength) {
  std::mt19937 gen(1);
  const Vector a = ts::unit(gen, 5), b = ts::unit(gen, 5);
  EXPECT_NEAR(simplex_volume(std::vector<Vector>{a, b}), (a - b).norm(), 1e-14);
}

TEST(SimplexVolume, CollinearIsZero) {
  Vector a(3), b(3), m(3);
  a << 1, 0, 0;
  b << 0, 1, 0;
  m = 0.5 * (a + b);
  EXPECT_NEAR(simplex_volume(std::vector<Vector>{a, m, b}), 0.0, 1e-10);
}

TEST(SimplexVolume, EquilateralTriangleMatchesShoelace) {
  // Three unit vectors 120 degrees apart on a great circle, then rotated
  // into a random 7-dimensional frame.
  std::mt19937 gen(2);
  const Matrix q = ts::rotation(gen, 7);
  std::vector<Vector> pts;
  std::vector<std::pair<double, double>> planar;
  for (int k = 0; k < 3; ++k) {
    const double th = 2.0 * M_PI * k / 3.0;
    planar.push_back({std::cos(th), std::sin(th)});
    pts.push_back(std::cos(th) * q.col(0) + std::sin(th) * q.col(1));
  }
  double shoelace = 0.0;
  for (int k = 0; k < 3; ++k) {
    const auto& [x1, y1] = planar[k];
    const auto& [x2, y2] = planar[(k + 1) % 3];
    shoelace += x1 * y2 - x2 * y1;
  }
  shoelace = std::abs(shoelace) / 2.0;
  const double s = (pts[0] - pts[1]).norm();
  EXPECT_NEAR(simplex_volume(pts), shoelace, 1e-12);
  EXPECT_NEAR(simplex_volume(pts), std::sqrt(3.0) / 4.0 * s * s, 1e-12);
}

TEST(SimplexVolume, BaseVertexAndRotationInvariance) {
  std::mt19937 gen(3);
  for (int rep = 0; rep < 100; ++rep) {
    const int d = 3 + rep % 10;
    const int b = 2 + rep % (d);
    std::vector<Vector> pts;
    for (int i = 0; i < b; ++i) pts.push_back(ts::unit(gen, d));
    const double v = simplex_volume(pts);
    EXPECT_GE(v, 0.0);
    for (int base = 1; base < b; ++base)
      EXPECT_NEAR(simplex_volume(pts, base), v, 1e-9 * std::max(v, 1e-300));
    const Matrix r = ts::rotation(gen, d);
    std::vector<Vector> rotated;
    for (const auto& p : pts) rotated.push_back(r * p);
    EXPECT_NEAR(simplex_volume(rotated), v, 1e-9 * v);
  }
}

TEST(SimplexVolume, AffinelyDependentIsZero) {
  std::mt19937 gen(4);
  const Vector a = ts::gaussian(gen, 6), b = ts::gaussian(gen, 6), c = ts::gaussian(gen, 6);
  const Vector dpt = 0.3 * a + 0.3 * b + 0.4 * c;  // affine combination
  EXPECT_NEAR(simplex_volume(std::vector<Vector>{a, b, c, dpt}), 0.0, 1e-6);
}

TEST(SimplexVolume, Errors) {
  try {
    simplex_volume(std::vector<Vector>{Vector::Ones(3)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooFewPoints);
  }
  EXPECT_THROW(simplex_volume(std::vector<Vector>{Vector::Ones(3), Vector::Zero(3)}, 2), Error);
}

TEST(SimplexVolume, GramIsSymmetricWithNonNegativeDiagonal) {
  std::mt19937 gen(5);
  std::vector<Vector> pts;
  for (int i = 0; i < 5; ++i) pts.push_back(ts::unit(gen, 8));
  const Matrix g = gram_matrix(edge_matrix(pts));
  EXPECT_LE((g - g.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GE(g.diagonal().minCoeff(), 0.0);
  EXPECT_EQ(edge_matrix(pts).edges.cols(), 4);
}

TEST(Determinant, MatchesLuOracle) {
  std::mt19937 gen(6);
  for (int rep = 0; rep < 50; ++rep) {
    Matrix m(5, 5);
    for (int j = 0; j < 5; ++j) m.col(j) = ts::gaussian(gen, 5);
    const Matrix g = m.transpose() * m;
    EXPECT_NEAR(psd_determinant(g), g.partialPivLu().determinant(),
                1e-10 * std::abs(g.partialPivLu().determinant()));
  }
}

TEST(DeterminantMonotonicity, HandCases) {
  EXPECT_TRUE(determinant_increase_holds(Matrix::Identity(3, 3), Matrix::Zero(3, 3)));
  EXPECT_TRUE(determinant_increase_holds(Matrix::Identity(2, 2), Matrix::Identity(2, 2)));
  EXPECT_DOUBLE_EQ(psd_determinant(2.0 * Matrix::Identity(2, 2)), 4.0);
}

TEST(DeterminantMonotonicity, VerifierPasses) {
  const auto r = verify_determinant_monotonicity(6, 2000, 1);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.values.at("violations"), 0.0);
  EXPECT_GE(r.values.at("min_det_ratio"), 1.0);
}

TEST(ProjectionCommutativity, Verifier) {
  const auto r = verify_projection_commutativity(32, 5, 300, 2);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.values.at("max_discrepancy"), 1e-10);
  EXPECT_TRUE(verify_projection_commutativity(6, 6, 50, 3).pass);
  EXPECT_THROW(verify_projection_commutativity(4, 5, 1, 0), Error);
}

TEST(VolumeExpansion, ZeroRangeReportsFailure) {
  VolumeExpansionConfig cfg;
  cfg.params = {0.0, 0.0, true, 0};
  const auto r = verify_volume_expansion(cfg, 50);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.values.at("mean_gain"), 0.0);
}

TEST(VolumeExpansion, SmallSphereExamplePasses) {
  VolumeExpansionConfig cfg;
  cfg.batch_size = 3;
  cfg.dim = 3;
  cfg.params = {0.1, 0.1, true, 0};
  cfg.spread = 0.05;
  cfg.seed = 4;
  EXPECT_TRUE(verify_volume_expansion(cfg, 2000).pass);
}

TEST(VolumeExpansion, Preconditions) {
  VolumeExpansionConfig cfg;
  cfg.batch_size = 18;
  EXPECT_THROW(verify_volume_expansion(cfg, 10), Error);
}
