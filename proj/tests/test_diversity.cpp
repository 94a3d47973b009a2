#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "gass/diversity.hpp"
#include "support.hpp"

using namespace gass;
namespace ts = testing_support;

namespace {

EmbeddingBatch batch_of(const Vector& anchor, const std::vector<Vector>& members) {
  EmbeddingBatch b;
  b.anchor = normalize(anchor);
  for (const auto& m : members) b.members.push_back(normalize(m));
  return b;
}

EmbeddingBatch random_batch(std::mt19937& gen, int b, int d) {
  std::vector<Vector> ms;
  for (int i = 0; i < b; ++i) ms.push_back(ts::gaussian(gen, d));
  return batch_of(ts::gaussian(gen, d), ms);
}

Embedding tangent(std::mt19937& gen, const Embedding& anchor) {
  return gram_schmidt(std::vector<Vector>{ts::gaussian(gen, anchor.dim())},
                      std::span<const Embedding>(&anchor, 1))[0];
}

}  // namespace

TEST(Candidates, OrthogonalToAnchorAndEachOther) {
  const auto anchor = normalize(ts::axis(4, 0));
  const auto c = random_orthogonal_candidates(anchor, 2, 17);
  ASSERT_EQ(c.size(), 2u);
  for (const auto& r : c) {
    EXPECT_LE(std::abs(r[0]), 1e-10);
    EXPECT_NEAR(r.coords().norm(), 1.0, 1e-12);
  }
  EXPECT_LE(std::abs(c[0].dot(c[1])), 1e-10);
}

TEST(Candidates, FullTangentBasisReconstructs) {
  std::mt19937 gen(2);
  const int d = 7;
  const auto anchor = normalize(ts::gaussian(gen, d));
  const auto c = random_orthogonal_candidates(anchor, d - 1, 5);
  Matrix m(d, d - 1);
  for (int k = 0; k < d - 1; ++k) m.col(k) = c[k].coords();
  for (int rep = 0; rep < 20; ++rep) {
    Vector v = ts::gaussian(gen, d);
    v -= v.dot(anchor.coords()) * anchor.coords();
    const Vector coef = m.colPivHouseholderQr().solve(v);
    EXPECT_LE((m * coef - v).norm(), 1e-9);
  }
}

TEST(Candidates, TooManyThrows) {
  const auto anchor = normalize(ts::axis(5, 1));
  try {
    random_orthogonal_candidates(anchor, 5, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionTooSmall);
  }
}

TEST(Candidates, DeterministicGivenSeed) {
  const auto anchor = normalize(Vector::Ones(9));
  const auto a = random_orthogonal_candidates(anchor, 4, 99);
  const auto b = random_orthogonal_candidates(anchor, 4, 99);
  for (int k = 0; k < 4; ++k) EXPECT_EQ(a[k], b[k]);
}

TEST(ResidualBasis, PerfectAlignmentSelectsInjectedCandidate) {
  std::mt19937 gen(8);
  const int d = 8;
  const auto anchor = normalize(ts::gaussian(gen, d));
  auto cands = random_orthogonal_candidates(anchor, 6, 3);
  const auto u = cands[3];
  EmbeddingBatch batch;
  batch.anchor = anchor;
  for (int i = 0; i < 5; ++i) batch.members.push_back(normalize((i % 2 ? -1.0 : 1.0) * u.coords()));
  const auto rb = select_residual_basis(batch, cands);
  EXPECT_EQ(rb.index, 3u);
  EXPECT_NEAR(rb.candidates.energies[3], 1.0, 1e-12);
}

TEST(ResidualBasis, AnchorBatchTiesToIndexZero) {
  const auto anchor = normalize(Vector::LinSpaced(6, 1, 6));
  EmbeddingBatch batch;
  batch.anchor = anchor;
  batch.members.assign(4, anchor);
  const auto rb = identify_residual_basis(batch, 5, 11);
  EXPECT_EQ(rb.index, 0u);
  for (double e : rb.candidates.energies) EXPECT_LE(e, 1e-12);
}

TEST(ResidualBasis, MatchesBruteForceScan) {
  std::mt19937 gen(13);
  for (int rep = 0; rep < 20; ++rep) {
    const auto batch = random_batch(gen, 6, 16);
    const auto rb = identify_residual_basis(batch, 10, 1000 + rep);
    ASSERT_EQ(rb.candidates.directions.size(), 10u);
    std::vector<double> energies;
    for (const auto& r : rb.candidates.directions) {
      EXPECT_LE(std::abs(r.dot(batch.anchor)), 1e-10);
      double s = 0;
      for (const auto& m : batch.members) s += std::abs(m.coords().dot(r.coords()));
      energies.push_back(s / 6.0);
    }
    const auto best = std::max_element(energies.begin(), energies.end()) - energies.begin();
    EXPECT_EQ(rb.index, static_cast<std::size_t>(best));
    for (std::size_t k = 0; k < 10; ++k) {
      EXPECT_NEAR(rb.candidates.energies[k], energies[k], 1e-14);
      EXPECT_GE(rb.candidates.energies[rb.index], rb.candidates.energies[k]);
    }
    EXPECT_EQ(rb.u_ind, rb.candidates.directions[rb.index]);
    EXPECT_EQ(identify_residual_basis(batch, 10, 1000 + rep).u_ind, rb.u_ind);
  }
}

TEST(Spread, ConstantBatchIsZero) {
  std::mt19937 gen(1);
  const Vector m = ts::gaussian(gen, 8);
  const auto batch = batch_of(ts::gaussian(gen, 8), {m, m, m, m});
  const auto r = spread_score(batch, tangent(gen, batch.anchor));
  EXPECT_EQ(r.d_dep, 0.0);
  EXPECT_EQ(r.d_ind, 0.0);
  EXPECT_EQ(r.spp, 0.0);
}

TEST(Spread, AxisAlignedPairIsTwo) {
  const auto batch = batch_of(ts::axis(5, 0), {ts::axis(5, 0), ts::axis(5, 2)});
  const auto r = spread_score(batch, normalize(ts::axis(5, 2)));
  EXPECT_EQ(r.d_dep, 1.0);
  EXPECT_EQ(r.d_ind, 1.0);
  EXPECT_EQ(r.spp, 2.0);
}

TEST(Spread, MatchesDirectScan) {
  std::mt19937 gen(6);
  for (int rep = 0; rep < 50; ++rep) {
    const auto batch = random_batch(gen, 5, 8);
    const auto u = tangent(gen, batch.anchor);
    const auto r = spread_score(batch, u);
    double dlo = 9, dhi = -9, ilo = 9, ihi = -9;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const double a = batch.members[i].coords().dot(batch.anchor.coords());
      const double b = batch.members[i].coords().dot(u.coords());
      dlo = std::min(dlo, a), dhi = std::max(dhi, a), ilo = std::min(ilo, b), ihi = std::max(ihi, b);
      EXPECT_DOUBLE_EQ(r.proj_coords[i].dep, a);
      EXPECT_DOUBLE_EQ(r.proj_coords[i].ind, b);
    }
    EXPECT_DOUBLE_EQ(r.d_dep, dhi - dlo);
    EXPECT_DOUBLE_EQ(r.d_ind, ihi - ilo);
    EXPECT_EQ(r.spp, r.d_dep + r.d_ind);
    EXPECT_GE(r.d_dep, 0.0);
    EXPECT_LE(r.d_dep, 2.0);
    EXPECT_LE(r.d_ind, 2.0);
  }
}

TEST(Spread, PermutationAndDuplicationInvariance) {
  std::mt19937 gen(31);
  for (int rep = 0; rep < 200; ++rep) {
    auto batch = random_batch(gen, 2 + rep % 7, 3 + rep % 12);
    const auto u = tangent(gen, batch.anchor);
    const auto base = spread_score(batch, u);
    auto shuffled = batch;
    std::shuffle(shuffled.members.begin(), shuffled.members.end(), gen);
    const auto p = spread_score(shuffled, u);
    EXPECT_EQ(p.spp, base.spp);
    EXPECT_EQ(p.d_dep, base.d_dep);
    auto dup = batch;
    dup.members.push_back(batch.members[gen() % batch.size()]);
    EXPECT_EQ(spread_score(dup, u).spp, base.spp);
  }
}

TEST(Spread, InteriorMemberLeavesSppUnchanged) {
  const auto anchor = normalize(ts::axis(4, 0));
  const auto u = normalize(ts::axis(4, 1));
  Vector a(4), b(4), c(4);
  a << 0.9, 0.3, 0.3, 0.1;
  b << 0.5, -0.4, 0.2, 0.7;
  c << 0.7, 0.0, 0.5, 0.4;  // normalized projections fall strictly inside
  auto batch = batch_of(ts::axis(4, 0), {a, b});
  const double before = spread_score(batch, u).spp;
  const auto cn = normalize(c);
  ASSERT_GT(cn[0], std::min(batch.members[0][0], batch.members[1][0]));
  ASSERT_LT(cn[0], std::max(batch.members[0][0], batch.members[1][0]));
  ASSERT_GT(cn[1], std::min(batch.members[0][1], batch.members[1][1]));
  ASSERT_LT(cn[1], std::max(batch.members[0][1], batch.members[1][1]));
  batch.members.push_back(cn);
  EXPECT_EQ(spread_score(batch, u).spp, before);
  (void)anchor;
}

TEST(Spread, SingleMemberAndBadBasis) {
  const auto batch = batch_of(ts::axis(3, 0), {Vector::Ones(3)});
  EXPECT_EQ(spread_score(batch, normalize(ts::axis(3, 1))).spp, 0.0);
  EXPECT_THROW(spread_score(batch, normalize(Vector::Ones(3))), Error);
}

TEST(Alignment, Cases) {
  const Vector e = ts::axis(4, 0), p = ts::axis(4, 3);
  EXPECT_DOUBLE_EQ(alignment_score(batch_of(e, {e, e})), 1.0);
  EXPECT_DOUBLE_EQ(alignment_score(batch_of(e, {p, p})), 0.0);
  EXPECT_DOUBLE_EQ(alignment_score(batch_of(e, {e, p})), 0.5);
}

TEST(Vendi, IdenticalAndOrthonormal) {
  const Vector m = Vector::LinSpaced(6, -1, 2);
  EXPECT_NEAR(vendi_score(batch_of(ts::axis(6, 0), {m, m, m, m, m})), 1.0, 1e-9);
  EXPECT_NEAR(vendi_score(batch_of(ts::axis(6, 0),
                                   {ts::axis(6, 0), ts::axis(6, 1), ts::axis(6, 2), ts::axis(6, 3)})),
              4.0, 1e-9);
}

TEST(Vendi, ConstantCosineTripleMatchesClosedForm) {
  // Unit vectors with pairwise cosine c have kernel (1-c)I + c11^T, whose
  // eigenvalues are 1+2c (once) and 1-c (twice).
  const double c = 0.5;
  const Matrix k = (1 - c) * Matrix::Identity(3, 3) + c * Matrix::Ones(3, 3);
  const Eigen::LLT<Matrix> llt(k);
  const Matrix l = llt.matrixL();
  std::vector<Vector> ms;
  for (int i = 0; i < 3; ++i) {
    Vector v = Vector::Zero(5);
    v.head(3) = l.row(i).transpose();
    ms.push_back(v);
  }
  const double l1 = (1 + 2 * c) / 3, l2 = (1 - c) / 3;
  const double expected = std::exp(-(l1 * std::log(l1) + 2 * l2 * std::log(l2)));
  EXPECT_NEAR(vendi_score(batch_of(ts::axis(5, 4), ms)), expected, 1e-9);
}

TEST(Vendi, BoundedByBatchSize) {
  std::mt19937 gen(40);
  for (int rep = 0; rep < 100; ++rep) {
    const int b = 1 + rep % 9;
    const auto batch = random_batch(gen, b, 2 + rep % 5);
    const double vs = vendi_score(batch);
    EXPECT_GE(vs, 1.0);
    EXPECT_LE(vs, static_cast<double>(b));
  }
}
