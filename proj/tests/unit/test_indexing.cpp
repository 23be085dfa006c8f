#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "monarch/indexing.hpp"
#include "monarch/random.hpp"

namespace monarch {
namespace {

TEST(BlockForm, Examples) {
  EXPECT_EQ(block_form(5, 2), (BlockForm{2, 1, 2}));
  EXPECT_EQ(block_form(0, 7), (BlockForm{0, 0, 7}));
  EXPECT_EQ(block_form(11, 4), (BlockForm{2, 3, 4}));
  EXPECT_EQ(block_form(11, 4).flat(), 11u);
}

TEST(Sigma, DirectFormula) {
  BlockPermutation p(2, 8);
  EXPECT_EQ(p.apply(1), 4u);
  BlockPermutation q(2, 4);
  std::vector<std::size_t> got(q.table().begin(), q.table().end());
  EXPECT_EQ(got, (std::vector<std::size_t>{0, 2, 1, 3}));
}

TEST(Sigma, SquareRootBlockIsInvolution) {
  BlockPermutation p(4, 16);
  for (std::size_t i = 0; i < 16; ++i) EXPECT_EQ(p.apply(p.apply(i)), i);
}

TEST(Sigma, OutOfRange) {
  try {
    BlockPermutation(2, 4).apply(4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IndexOutOfRange);
  }
}

TEST(Sigma, BadBlocking) {
  EXPECT_THROW(BlockPermutation(3, 8), Error);
  EXPECT_THROW(BlockPermutation(0, 8), Error);
}

TEST(Sigma, InverseComposesToIdentity) {
  for (auto [b, n] : {std::pair<std::size_t, std::size_t>{2, 8}, {4, 16}, {2, 6}}) {
    BlockPermutation p(b, n);
    BlockPermutation inv = p.inverse();
    EXPECT_EQ(inv.block(), n / b);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(inv.apply(p.apply(i)), i);
      EXPECT_EQ(p.apply(inv.apply(i)), i);
    }
  }
}

TEST(Sigma, BijectiveForAllDivisors) {
  for (std::size_t n = 1; n <= 64; ++n)
    for (std::size_t b = 1; b <= n; ++b) {
      if (n % b) continue;
      BlockPermutation p(b, n);
      std::vector<std::size_t> img(p.table().begin(), p.table().end());
      std::sort(img.begin(), img.end());
      std::vector<std::size_t> want(n);
      std::iota(want.begin(), want.end(), 0);
      ASSERT_EQ(img, want) << b << "," << n;
    }
}

TEST(Sigma, TransposeActionEqualsComplementBlock) {
  Rng rng(1);
  for (std::size_t n = 1; n <= 64; ++n)
    for (std::size_t b = 1; b <= n; ++b) {
      if (n % b) continue;
      auto x = rng.vector<double>(n);
      BlockPermutation p(b, n);
      BlockPermutation c(n / b, n);
      ASSERT_EQ(p.permute_transpose(std::span<const double>(x)), c.permute(std::span<const double>(x)));
    }
}

DenseMatrix<double> distinct(std::size_t n) {
  DenseMatrix<double> a(n, n);
  for (std::size_t i = 0; i < n * n; ++i) a.data()[i] = static_cast<double>(i);
  return a;
}

TEST(PermuteRows, IdentityBlock) {
  auto a = distinct(5);
  EXPECT_EQ(permute_rows(BlockPermutation(1, 5), a), a);
}

TEST(PermuteRows, RowOrder) {
  auto a = distinct(4);
  auto out = permute_rows(BlockPermutation(2, 4), a);
  const std::size_t order[] = {0, 2, 1, 3};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(out(order[i], j), a(i, j));
  // Row 1 of the output holds row 2 of the input (sigma is an involution here).
  EXPECT_EQ(out(1, 0), a(2, 0));
}

TEST(PermuteRows, RoundTripBitwise) {
  Rng rng(2);
  auto a = rng.matrix<cplx>(12, 12);
  BlockPermutation p(3, 12);
  EXPECT_EQ(permute_rows(p.inverse(), permute_rows(p, a)), a);
  EXPECT_EQ(permute_cols(p.inverse(), permute_cols(p, a)), a);
}

TEST(PermuteRows, MatchesDenseMatrixAction) {
  Rng rng(3);
  auto a = rng.matrix<double>(12, 12);
  BlockPermutation p(4, 12);
  auto pd = p.to_dense<double>();
  EXPECT_EQ(permute_rows(p, a), matmul(pd, a));
  EXPECT_EQ(permute_cols(p, a), matmul(a, transpose(pd)));
  auto conj = conjugate_by(p, a);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 12; ++j) EXPECT_EQ(conj(p.apply(i), p.apply(j)), a(i, j));
}

TEST(PermuteRows, DimensionMismatch) {
  EXPECT_THROW(permute_rows(BlockPermutation(2, 4), DenseMatrix<double>(3, 4)), Error);
  EXPECT_THROW(permute_cols(BlockPermutation(2, 4), DenseMatrix<double>(4, 3)), Error);
}

TEST(BitReversal, MatchesBitReversedIndices) {
  for (std::size_t n : {2u, 4u, 8u, 16u, 64u}) {
    const auto t = bit_reversal(n).table();
    int bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (int k = 0; k < bits; ++k)
        if (i & (std::size_t{1} << k)) r |= std::size_t{1} << (bits - 1 - k);
      EXPECT_EQ(t[i], r) << n << " " << i;
    }
  }
  EXPECT_THROW(bit_reversal(6), Error);
}

TEST(BitReversal, PermuteMatchesTable) {
  Rng rng(4);
  auto chain = bit_reversal(32);
  auto x = rng.vector<double>(32);
  auto y = chain.permute(std::span<const double>(x));
  auto t = chain.table();
  for (std::size_t i = 0; i < 32; ++i) EXPECT_EQ(y[t[i]], x[i]);
}

}  // namespace
}  // namespace monarch
