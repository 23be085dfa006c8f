#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "monarch/factorization.hpp"
#include "monarch/random.hpp"

namespace monarch {
namespace {

template <Scalar T>
double rel_err(const DenseMatrix<cplx>& got, const DenseMatrix<T>& want) {
  auto w = to_complex(want);
  return frobenius_norm(subtract(got, w)) / frobenius_norm(w);
}

DenseMatrix<cplx> diag_of(const std::vector<cplx>& d) {
  DenseMatrix<cplx> out(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out(i, i) = d[i];
  return out;
}

// (P^T L1 P)(P^T D P)(P^T L2 P) from explicit parts.
struct Parts {
  BlockDiagMatrix<cplx> l1, l2;
  DiagBlockMatrix<cplx> d;
};

Parts random_parts(std::size_t n, std::size_t b, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t q = n / b;
  std::vector<DenseMatrix<cplx>> a, c;
  for (std::size_t i = 0; i < b; ++i) a.push_back(rng.matrix<cplx>(q, q));
  for (std::size_t i = 0; i < b; ++i) c.push_back(rng.matrix<cplx>(q, q));
  DiagBlockMatrix<cplx> d(q, q, b, b);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < b; ++j)
      for (cplx& v : d.diag(i, j)) v = rng.draw<cplx>() + cplx(3.0, 0.0);
  return {BlockDiagMatrix<cplx>(a), BlockDiagMatrix<cplx>(c), d};
}

DenseMatrix<cplx> assemble(const Parts& p, std::size_t n, std::size_t b) {
  MMStarFactorization f;
  f.n = n;
  f.b = b;
  f.l1 = p.l1;
  f.l2 = p.l2;
  f.r = p.d;
  return reconstruct(f);
}

TEST(Factorize, SixteenByFourRoundTrip) {
  auto p = random_mm_star<double>(16, 4, 1);
  auto m = product_to_dense(p);
  auto f = factorize_mm_star(m, 4);
  EXPECT_LE(rel_err(reconstruct(f), m), 1e-8);
  EXPECT_LE(f.max_offdiag_ratio, 1e-8);
}

TEST(Factorize, RoundTripGrid) {
  for (auto [n, b] : {std::pair<std::size_t, std::size_t>{8, 2}, {9, 3}, {16, 4}, {16, 2}, {32, 4}}) {
    for (std::uint64_t s = 0; s < 20; ++s) {
      auto m = product_to_dense(random_mm_star<double>(n, b, 1000 * n + 10 * b + s));
      auto f = factorize_mm_star(m, b);
      EXPECT_LE(rel_err(reconstruct(f), m), 1e-8) << n << "," << b << " seed " << s;
      EXPECT_LE(f.max_offdiag_ratio, 1e-8) << n << "," << b << " seed " << s;
    }
  }
}

TEST(Factorize, ComplexInput) {
  auto m = product_to_dense(random_mm_star<cplx>(16, 4, 7));
  auto f = factorize_mm_star(m, 4, 2);
  EXPECT_LE(rel_err(reconstruct(f), m), 1e-8);
  auto [left, right] = factorization_to_monarch(f);
  auto via_monarch = matmul(monarch_to_dense(left), monarch_to_dense(right));
  EXPECT_LE(rel_err(via_monarch, m), 1e-8);
}

TEST(Factorize, IdentityIsSingularBlock) {
  try {
    factorize_mm_star(DenseMatrix<double>::identity(16), 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularBlock);
    EXPECT_NE(std::string(e.what()).find("Assumption 1"), std::string::npos);
  }
}

TEST(Factorize, BadBlocking) {
  EXPECT_THROW(factorize_mm_star(DenseMatrix<double>::identity(16), 3), Error);
  EXPECT_THROW(factorize_mm_star(DenseMatrix<double>(4, 8), 2), Error);
}

TEST(Factorize, RecoversGaugeInvariants) {
  // The products D_i0^-1 D_ij D_0j^-1 D_00 are invariant under the diagonal
  // rescalings and survive the shared permutation as a multiset per (i, j),
  // with one permutation common to all (i, j).
  const std::size_t n = 9, b = 3, q = 3;
  auto parts = random_parts(n, b, 11);
  auto m = assemble(parts, n, b);
  auto f = factorize_mm_star(m, b);
  EXPECT_LE(rel_err(reconstruct(f), m), 1e-8);

  auto invariant = [&](const DiagBlockMatrix<cplx>& d, std::size_t i, std::size_t j, std::size_t t) {
    return d.diag(i, 0)[t] == cplx(0) ? cplx(0)
                                       : d.diag(0, 0)[t] * d.diag(i, j)[t] / (d.diag(i, 0)[t] * d.diag(0, j)[t]);
  };
  // Find the permutation from the first nontrivial (1,1) block, then check
  // that it works for all others.
  std::vector<std::size_t> perm(q);
  for (std::size_t t = 0; t < q; ++t) {
    const cplx want = invariant(f.r, 1, 1, t);
    double best = 1e300;
    for (std::size_t s = 0; s < q; ++s) {
      const double d = std::abs(invariant(parts.d, 1, 1, s) - want);
      if (d < best) {
        best = d;
        perm[t] = s;
      }
    }
  }
  std::vector<std::size_t> sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t t = 0; t < q; ++t) ASSERT_EQ(sorted[t], t);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < b; ++j)
      for (std::size_t t = 0; t < q; ++t) {
        const cplx got = invariant(f.r, i, j, t);
        const cplx want = invariant(parts.d, i, j, perm[t]);
        EXPECT_LE(std::abs(got - want), 1e-8 * std::abs(want)) << i << j << t;
      }
}

TEST(Factorize, GaugeCovariantReconstruction) {
  const std::size_t n = 16, b = 4, q = 4;
  auto parts = random_parts(n, b, 12);
  auto base = assemble(parts, n, b);
  // Rescale A_i on the right, C_j on the left and permute consistently.
  Rng rng(13);
  std::vector<std::size_t> perm{2, 0, 3, 1};
  DenseMatrix<cplx> pm(q, q);
  for (std::size_t t = 0; t < q; ++t) pm(t, perm[t]) = 1.0;
  Parts g = parts;
  std::vector<std::vector<cplx>> s(b), sp(b);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t t = 0; t < q; ++t) {
      s[i].push_back(rng.draw<cplx>() + cplx(2.0));
      sp[i].push_back(rng.draw<cplx>() + cplx(2.0));
    }
  for (std::size_t i = 0; i < b; ++i) {
    g.l1.block(i) = matmul(matmul(parts.l1.block(i), pm), lu_invert(diag_of(s[i])));
    g.l2.block(i) = matmul(matmul(lu_invert(diag_of(sp[i])), transpose(pm)), parts.l2.block(i));
  }
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < b; ++j) {
      std::vector<cplx> d(parts.d.diag(i, j).begin(), parts.d.diag(i, j).end());
      auto dd = matmul(matmul(matmul(matmul(diag_of(s[i]), transpose(pm)), diag_of(d)), pm), diag_of(sp[j]));
      for (std::size_t t = 0; t < q; ++t) g.d.diag(i, j)[t] = dd(t, t);
    }
  auto gauged = assemble(g, n, b);
  EXPECT_LE(rel_err(gauged, base), 1e-12);
  EXPECT_LE(rel_err(reconstruct(factorize_mm_star(gauged, b)), base), 1e-8);
  EXPECT_LE(rel_err(reconstruct(factorize_mm_star(base, b)), base), 1e-8);
}

TEST(Factorize, DeterministicAcrossThreads) {
  auto m = product_to_dense(random_mm_star<double>(16, 4, 14));
  auto a = factorize_mm_star(m, 4, 1);
  auto c = factorize_mm_star(m, 4, 3);
  EXPECT_EQ(a.l1, c.l1);
  EXPECT_EQ(a.l2, c.l2);
  EXPECT_EQ(a.r, c.r);
}

TEST(Factorize, WorkScalesLikeCubeOverB) {
  OpCounter small_b, large_b;
  factorize_mm_star(product_to_dense(random_mm_star<double>(64, 4, 15)), 4, 1, &small_b);
  factorize_mm_star(product_to_dense(random_mm_star<double>(64, 8, 16)), 8, 1, &large_b);
  const double ratio = double(small_b.value()) / double(large_b.value());
  EXPECT_GE(ratio, 2.0 / 3.0);
  EXPECT_LE(ratio, 6.0);
}

TEST(Simdiag, AlreadyDiagonal) {
  std::vector<DenseMatrix<cplx>> fam{diag_of({1.0, 2.0, 3.0}), diag_of({4.0, -1.0, 0.5})};
  auto r = simultaneous_diagonalize(fam);
  EXPECT_EQ(r.diag_residual, 0.0);
  // Q is a row-scaled permutation.
  for (std::size_t i = 0; i < 3; ++i) {
    int nonzero = 0;
    for (std::size_t j = 0; j < 3; ++j) nonzero += std::abs(r.q(i, j)) > 1e-14;
    EXPECT_EQ(nonzero, 1);
  }
}

TEST(Simdiag, ConstructedCommutingFamily) {
  Rng rng(17);
  auto c = rng.matrix<cplx>(6, 6);
  auto cinv = lu_invert(c);
  std::vector<DenseMatrix<cplx>> fam;
  for (int k = 0; k < 3; ++k) fam.push_back(matmul(matmul(cinv, diag_of(rng.vector<cplx>(6))), c));
  auto r = simultaneous_diagonalize(fam);
  EXPECT_LE(r.diag_residual, 1e-8);
}

TEST(Simdiag, StagedPathSplitsClusters) {
  // Each member alone has repeated eigenvalues; only the family pins Q down.
  // A zero-weight combination is impossible to force, so call with a family
  // whose first member is the identity and check the staged refinement
  // through residuals of the degenerate members.
  Rng rng(18);
  auto c = rng.matrix<cplx>(4, 4);
  auto cinv = lu_invert(c);
  std::vector<DenseMatrix<cplx>> fam{
      DenseMatrix<cplx>::identity(4),
      matmul(matmul(cinv, diag_of({1.0, 1.0, 2.0, 2.0})), c),
      matmul(matmul(cinv, diag_of({5.0, 7.0, 5.0, 7.0})), c),
  };
  auto r = simultaneous_diagonalize(fam);
  EXPECT_LE(r.diag_residual, 1e-8);
}

TEST(Simdiag, DefectiveMemberFails) {
  std::vector<DenseMatrix<cplx>> fam{DenseMatrix<cplx>(2, 2, {0.0, 1.0, 0.0, 0.0}), DenseMatrix<cplx>::identity(2)};
  try {
    simultaneous_diagonalize(fam);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::SimdiagFailed || e.code() == ErrorCode::Defective);
  }
}

TEST(Simdiag, NonCommutingFamilyFails) {
  Rng rng(19);
  std::vector<DenseMatrix<cplx>> fam{rng.matrix<cplx>(5, 5), rng.matrix<cplx>(5, 5)};
  try {
    simultaneous_diagonalize(fam);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::SimdiagFailed || e.code() == ErrorCode::Defective);
  }
}

TEST(Assumption1, ConstructedPasses) {
  auto m = product_to_dense(random_mm_star<double>(16, 4, 20));
  auto rep = assumption1_check(m, 4);
  EXPECT_TRUE(rep.pass);
  EXPECT_LT(rep.worst_condition, 1e10);
}

TEST(Assumption1, IdentityFails) {
  auto rep = assumption1_check(DenseMatrix<double>::identity(16), 4);
  EXPECT_FALSE(rep.pass);
  EXPECT_TRUE(std::isinf(rep.worst_condition));
}

TEST(Assumption1, ZeroedMiddleEntryDegrades) {
  auto p = random_mm_star<double>(16, 4, 21);
  auto m1 = p.factors()[0].matrix;
  auto m2 = p.factors()[1].matrix;
  // A zero entry in R1 with R2 = I-like structure: zero one entry of the
  // middle factor directly by zeroing a row of R1's block against a
  // diagonal R2.
  m2.r() = BlockDiagMatrix<double>::identity(4, 16);
  m1.r().block(1)(2, 3) = 0.0;
  auto m = matmul(monarch_to_dense(m1), transpose(monarch_to_dense(m2)));
  auto rep = assumption1_check(m, 4);
  EXPECT_FALSE(rep.pass);
  EXPECT_THROW(factorize_mm_star(m, 4), Error);
}

}  // namespace
}  // namespace monarch
