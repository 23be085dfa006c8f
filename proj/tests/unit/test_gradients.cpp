#include <gtest/gtest.h>

#include <cmath>

#include "monarch/gradients.hpp"
#include "monarch/random.hpp"

namespace monarch {
namespace {

template <Scalar T>
T dot(std::span<const T> a, std::span<const T> b) {
  T s{};
  for (std::size_t i = 0; i < a.size(); ++i) {
    if constexpr (is_complex_v<T>) {
      s += std::conj(a[i]) * b[i];
    } else {
      s += a[i] * b[i];
    }
  }
  return s;
}

double max_abs_tangent(const MonarchTangent<double>& t) {
  double m = 0.0;
  for (const auto& blk : t.dltilde.blocks()) m = std::max(m, max_abs(blk));
  for (const auto& blk : t.dr.blocks()) m = std::max(m, max_abs(blk));
  for (double v : t.dx) m = std::max(m, std::abs(v));
  return m;
}

TEST(Vjp, ZeroUpstreamGivesZeroTangent) {
  auto m = random_monarch<double>(16, 4, 1);
  Rng rng(2);
  auto x = rng.vector<double>(16);
  std::vector<double> u(16, 0.0);
  auto t = matvec_vjp<double>(m, x, u);
  EXPECT_EQ(max_abs_tangent(t), 0.0);
}

TEST(Vjp, IdentityFactors) {
  const std::size_t n = 16, b = 4, q = 4;
  auto m = MonarchMatrix<double>::identity(n, b);
  Rng rng(3);
  auto x = rng.vector<double>(n);
  auto u = rng.vector<double>(n);
  auto t = matvec_vjp<double>(m, x, u);
  for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(t.dx[i], u[i]);
  // Identity path: y = x, so dR_k[j, i] = u[kb + j] * x[kb + i] and
  // dLtilde_j[l, k] = u[lb + j] * x[kb + j].
  for (std::size_t k = 0; k < q; ++k)
    for (std::size_t j = 0; j < b; ++j)
      for (std::size_t i = 0; i < b; ++i) EXPECT_DOUBLE_EQ(t.dr.block(k)(j, i), u[k * b + j] * x[k * b + i]);
  for (std::size_t j = 0; j < b; ++j)
    for (std::size_t l = 0; l < q; ++l)
      for (std::size_t k = 0; k < q; ++k) EXPECT_DOUBLE_EQ(t.dltilde.block(j)(l, k), u[l * b + j] * x[k * b + j]);
  auto rep = gradcheck(m, x, 4);
  EXPECT_TRUE(rep.pass);
  EXPECT_LE(rep.max_rel_error, 1e-9);
}

TEST(Vjp, RandomInstancesPassGradcheck) {
  int count = 0;
  for (auto [n, b] : {std::pair<std::size_t, std::size_t>{4, 2}, {16, 4}, {16, 2}}) {
    for (std::uint64_t s = 0; s < 10; ++s) {
      auto m = random_monarch<double>(n, b, 100 + s);
      Rng rng(200 + s);
      auto x = rng.vector<double>(n);
      auto rep = gradcheck(m, x, 300 + s);
      EXPECT_TRUE(rep.pass) << n << "," << b << " seed " << s << " err " << rep.max_rel_error;
      EXPECT_EQ(rep.checked, n * n / b + n * b + n);
      ++count;
    }
  }
  EXPECT_EQ(count, 30);
}

TEST(Vjp, FaultInjectionLocalizes) {
  auto m = random_monarch<double>(16, 4, 5);
  Rng rng(6);
  auto x = rng.vector<double>(16);
  auto u = rng.vector<double>(16);
  const std::array<Coordinate, 3> targets{Coordinate{ParamKind::Ltilde, 2, 1, 3}, Coordinate{ParamKind::R, 3, 0, 2},
                                          Coordinate{ParamKind::X, 0, 0, 9}};
  for (const Coordinate& c : targets) {
    auto t = matvec_vjp<double>(m, x, u);
    double* entry = c.kind == ParamKind::Ltilde ? &t.dltilde.block(c.block)(c.row, c.col)
                    : c.kind == ParamKind::R    ? &t.dr.block(c.block)(c.row, c.col)
                                                : &t.dx[c.col];
    *entry *= 1.1;
    auto rep = gradcheck_tangent(m, x, u, t);
    EXPECT_FALSE(rep.pass);
    ASSERT_EQ(rep.failures.size(), 1u);
    EXPECT_EQ(rep.failures[0].where, c);
    EXPECT_EQ(rep.worst, c);
  }
}

TEST(Vjp, DualityWithForwardProbe) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto m = random_monarch<cplx>(16, 4, 7 + s);
    Rng rng(8 + s);
    auto x = rng.vector<cplx>(16);
    auto u = rng.vector<cplx>(16);
    auto probe = rng.vector<cplx>(16);
    auto t = matvec_vjp<cplx>(m, x, u);
    auto mp = monarch_matvec<cplx>(m, probe);
    const cplx lhs = dot<cplx>(u, mp);
    const cplx rhs = dot<cplx>(t.dx, probe);
    EXPECT_LE(std::abs(lhs - rhs), 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST(Vjp, ParameterDualityComplex) {
  // d/dt <u, M(theta + t*delta) x> equals <dtheta, delta> summed over factors.
  auto m = random_monarch<cplx>(16, 4, 9);
  Rng rng(10);
  auto x = rng.vector<cplx>(16);
  auto u = rng.vector<cplx>(16);
  auto dl = random_monarch<cplx>(16, 4, 11);
  auto t = matvec_vjp<cplx>(m, x, u);
  // M is linear in Ltilde, so the derivative along dLtilde is exact.
  MonarchMatrix<cplx> along(dl.ltilde(), m.r());
  const cplx lhs = dot<cplx>(u, monarch_matvec<cplx>(along, x));
  cplx rhs{};
  for (std::size_t j = 0; j < 4; ++j) rhs += dot<cplx>(t.dltilde.block(j).data(), dl.ltilde().block(j).data());
  EXPECT_LE(std::abs(lhs - rhs), 1e-10 * std::abs(lhs));
}

TEST(Vjp, NormSquaredGradientMatchesDense) {
  auto m = random_monarch<double>(16, 4, 12);
  Rng rng(13);
  auto x = rng.vector<double>(16);
  auto mx = monarch_matvec<double>(m, x);
  auto t = matvec_vjp<double>(m, x, mx);
  auto dense = monarch_to_dense(m);
  const auto dx = matvec(dense, std::span<const double>(x));
  auto want = matvec(transpose(dense), std::span<const double>(dx));
  double err = 0.0, nrm = 0.0;
  for (std::size_t i = 0; i < 16; ++i) {
    err += (t.dx[i] - want[i]) * (t.dx[i] - want[i]);
    nrm += want[i] * want[i];
  }
  EXPECT_LE(std::sqrt(err / nrm), 1e-10);
}

TEST(Vjp, TangentsStayInStructuredSupport) {
  auto m = random_monarch<double>(16, 4, 14);
  Rng rng(15);
  auto x = rng.vector<double>(16);
  auto u = rng.vector<double>(16);
  auto t = matvec_vjp<double>(m, x, u);
  EXPECT_EQ(t.dltilde.num_blocks(), m.ltilde().num_blocks());
  EXPECT_EQ(t.dltilde.block_rows(), m.ltilde().block_rows());
  EXPECT_EQ(t.dr.num_blocks(), m.r().num_blocks());
  EXPECT_EQ(t.dr.block_rows(), m.r().block_rows());
  EXPECT_TRUE(bd_membership(t.dr.to_dense(), 4, 4));
  EXPECT_TRUE(bd_membership(t.dltilde.to_dense(), 4, 4));
  EXPECT_EQ(t.dx.size(), 16u);
}

TEST(Vjp, ThreadedMatchesSerial) {
  auto m = random_monarch<double>(64, 8, 16);
  Rng rng(17);
  auto x = rng.vector<double>(64);
  auto u = rng.vector<double>(64);
  auto a = matvec_vjp<double>(m, x, u, 1);
  auto c = matvec_vjp<double>(m, x, u, 4);
  EXPECT_EQ(a.dltilde, c.dltilde);
  EXPECT_EQ(a.dr, c.dr);
  EXPECT_EQ(a.dx, c.dx);
}

TEST(Vjp, RejectsBadLengths) {
  auto m = random_monarch<double>(16, 4, 18);
  std::vector<double> x(16), u(15);
  try {
    matvec_vjp<double>(m, x, u);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

}  // namespace
}  // namespace monarch
