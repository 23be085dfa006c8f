#include <algorithm>
#include <cmath>
#include <limits>

#include "monarch/numerics.hpp"

namespace monarch {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxIterPerEigenvalue = 100;

struct Schur {
  DenseMatrix<cplx> t;
  DenseMatrix<cplx> z;
};

// A = Z H Z^* with H upper Hessenberg (Householder reflectors).
void hessenberg(DenseMatrix<cplx>& h, DenseMatrix<cplx>& z, std::uint64_t& ops) {
  const std::size_t n = h.rows();
  if (n < 3) return;
  std::vector<cplx> v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double alpha = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) alpha += std::norm(h(i, k));
    alpha = std::sqrt(alpha);
    if (alpha == 0.0) continue;
    const cplx ph = phase_of(h(k + 1, k));
    double vv = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) v[i] = h(i, k);
    v[k + 1] += ph * alpha;
    for (std::size_t i = k + 1; i < n; ++i) vv += std::norm(v[i]);
    if (vv == 0.0) continue;
    const double tau = 2.0 / vv;

    for (std::size_t j = k; j < n; ++j) {
      cplx dot{};
      for (std::size_t i = k + 1; i < n; ++i) dot += std::conj(v[i]) * h(i, j);
      dot *= tau;
      for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= v[i] * dot;
    }
    for (std::size_t i = 0; i < n; ++i) {
      cplx dot{};
      for (std::size_t j = k + 1; j < n; ++j) dot += h(i, j) * v[j];
      dot *= tau;
      for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= dot * std::conj(v[j]);
      cplx zdot{};
      for (std::size_t j = k + 1; j < n; ++j) zdot += z(i, j) * v[j];
      zdot *= tau;
      for (std::size_t j = k + 1; j < n; ++j) z(i, j) -= zdot * std::conj(v[j]);
    }
    for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
    ops += 2 * (n - k) * (n - k - 1) + 4 * n * (n - k - 1);
  }
}

struct Givens {
  double c;
  cplx s;
};

// G = [[c, s], [-conj(s), c]] with G [x; y] = [r; 0].
Givens make_givens(cplx x, cplx y) {
  if (y == cplx(0.0)) return {1.0, 0.0};
  if (x == cplx(0.0)) return {0.0, std::conj(y) / std::abs(y)};
  const double ax = std::abs(x);
  const double nrm = std::hypot(ax, std::abs(y));
  return {ax / nrm, (x / ax) * std::conj(y) / nrm};
}

Schur schur(const DenseMatrix<cplx>& a, std::uint64_t& ops) {
  const std::size_t n = a.rows();
  Schur s{a, DenseMatrix<cplx>::identity(n)};
  DenseMatrix<cplx>& h = s.t;
  DenseMatrix<cplx>& z = s.z;
  hessenberg(h, z, ops);

  const double hnorm = std::max(frobenius_norm(h), std::numeric_limits<double>::min());
  std::vector<Givens> rot(n);
  std::size_t hi = n == 0 ? 0 : n - 1;
  int iter = 0;
  while (hi > 0) {
    std::size_t l = hi;
    while (l > 0) {
      double scale = std::abs(h(l - 1, l - 1)) + std::abs(h(l, l));
      if (scale == 0.0) scale = hnorm;
      if (std::abs(h(l, l - 1)) <= kEps * scale) {
        h(l, l - 1) = 0.0;
        break;
      }
      --l;
    }
    if (l == hi) {
      --hi;
      iter = 0;
      continue;
    }
    if (++iter > kMaxIterPerEigenvalue) {
      throw Error(ErrorCode::NoConvergence, "shifted QR did not converge");
    }

    cplx mu;
    if (iter % 10 == 0) {
      mu = h(hi, hi) + 0.75 * std::abs(h(hi, hi - 1));
    } else {
      // Wilkinson shift: eigenvalue of the trailing 2x2 closer to h(hi,hi).
      const cplx p = h(hi - 1, hi - 1);
      const cplx q = h(hi - 1, hi);
      const cplx r = h(hi, hi - 1);
      const cplx d = h(hi, hi);
      const cplx half = 0.5 * (p - d);
      const cplx disc = std::sqrt(half * half + q * r);
      const cplx m1 = 0.5 * (p + d) + disc;
      const cplx m2 = 0.5 * (p + d) - disc;
      mu = std::abs(m1 - d) < std::abs(m2 - d) ? m1 : m2;
    }

    for (std::size_t k = l; k <= hi; ++k) h(k, k) -= mu;
    for (std::size_t k = l; k < hi; ++k) {
      const Givens g = make_givens(h(k, k), h(k + 1, k));
      rot[k] = g;
      for (std::size_t j = k; j < n; ++j) {
        const cplx t1 = h(k, j);
        const cplx t2 = h(k + 1, j);
        h(k, j) = g.c * t1 + g.s * t2;
        h(k + 1, j) = -std::conj(g.s) * t1 + g.c * t2;
      }
      h(k + 1, k) = 0.0;
      ops += 4 * (n - k);
    }
    for (std::size_t k = l; k < hi; ++k) {
      const Givens g = rot[k];
      const cplx sc = std::conj(g.s);
      for (std::size_t i = 0; i <= k + 1; ++i) {
        const cplx t1 = h(i, k);
        const cplx t2 = h(i, k + 1);
        h(i, k) = t1 * g.c + t2 * sc;
        h(i, k + 1) = -t1 * g.s + t2 * g.c;
      }
      for (std::size_t i = 0; i < n; ++i) {
        const cplx t1 = z(i, k);
        const cplx t2 = z(i, k + 1);
        z(i, k) = t1 * g.c + t2 * sc;
        z(i, k + 1) = -t1 * g.s + t2 * g.c;
      }
      ops += 4 * (k + 2) + 4 * n;
    }
    for (std::size_t k = l; k <= hi; ++k) h(k, k) += mu;
  }
  // Clear rounding residue below the diagonal.
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) h(i, j) = 0.0;
  return s;
}

}  // namespace

template <Scalar T>
EigResult eig(const DenseMatrix<T>& a, OpCounter* counter) {
  if (!a.is_square()) throw Error(ErrorCode::DimensionMismatch, "eig needs a square matrix");
  const std::size_t n = a.rows();
  std::uint64_t ops = 0;
  Schur s = schur(to_complex(a), ops);
  const DenseMatrix<cplx>& t = s.t;

  EigResult out;
  out.lambda.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.lambda[k] = t(k, k);

  // Back substitution for the eigenvectors of the triangular factor.
  const double tnorm = frobenius_norm(t);
  const double small = std::max(kEps * tnorm, std::numeric_limits<double>::min());
  DenseMatrix<cplx> y(n, n);
  for (std::size_t k = n; k-- > 0;) {
    y(k, k) = 1.0;
    for (std::size_t i = k; i-- > 0;) {
      cplx acc{};
      for (std::size_t j = i + 1; j <= k; ++j) acc += t(i, j) * y(j, k);
      cplx d = t(i, i) - t(k, k);
      if (std::abs(d) < small) d = small;
      y(i, k) = -acc / d;
      ops += k - i + 1;
    }
    double colmax = 0.0;
    for (std::size_t i = 0; i <= k; ++i) colmax = std::max(colmax, std::abs(y(i, k)));
    if (colmax > 1e100) {
      for (std::size_t i = 0; i <= k; ++i) y(i, k) /= colmax;
    }
  }
  out.q = matmul(s.z, y, nullptr);
  ops += n * n * n;
  for (std::size_t k = 0; k < n; ++k) {
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm += std::norm(out.q(i, k));
    nrm = std::sqrt(nrm);
    if (nrm > 0.0)
      for (std::size_t i = 0; i < n; ++i) out.q(i, k) /= nrm;
  }

  if (n > 0) {
    const SvdResult<cplx> sv = svd(out.q, counter);
    const double smin = sv.s.back();
    out.condition = smin > 0.0 ? sv.s.front() / smin : std::numeric_limits<double>::infinity();
  }
  tally(counter, ops);
  if (!(out.condition <= kDefectiveCondition)) {
    throw Error(ErrorCode::Defective,
                "eigenvector matrix condition " + std::to_string(out.condition) + " exceeds threshold");
  }
  return out;
}

template EigResult eig(const DenseMatrix<double>&, OpCounter*);
template EigResult eig(const DenseMatrix<cplx>&, OpCounter*);

}  // namespace monarch
