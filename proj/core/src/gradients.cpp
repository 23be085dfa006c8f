#include "monarch/gradients.hpp"

#include <algorithm>
#include <cmath>

#include "monarch/parallel.hpp"
#include "monarch/random.hpp"

namespace monarch {

namespace {

template <Scalar T>
T conj_if(T v) {
  if constexpr (is_complex_v<T>) {
    return std::conj(v);
  } else {
    return v;
  }
}

// f = sum_r u[r] * sum_c M[r, c] x[c] via the entry identity, in long double.
long double bilinear_form(const MonarchMatrix<double>& m, std::span<const double> x, std::span<const double> u) {
  const std::size_t b = m.b();
  const std::size_t q = m.q();
  long double f = 0.0L;
  for (std::size_t l = 0; l < q; ++l)
    for (std::size_t j = 0; j < b; ++j) {
      const long double ur = u[l * b + j];
      const DenseMatrix<double>& lj = m.ltilde().block(j);
      long double row = 0.0L;
      for (std::size_t k = 0; k < q; ++k) {
        const DenseMatrix<double>& rk = m.r().block(k);
        long double inner = 0.0L;
        for (std::size_t i = 0; i < b; ++i) inner += static_cast<long double>(rk(j, i)) * x[k * b + i];
        row += static_cast<long double>(lj(l, k)) * inner;
      }
      f += ur * row;
    }
  return f;
}

}  // namespace

template <Scalar T>
MonarchTangent<T> matvec_vjp(const MonarchMatrix<T>& m, std::span<const T> x, std::span<const T> upstream,
                             int threads) {
  const std::size_t n = m.n();
  if (x.size() != n || upstream.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "matvec_vjp: x and upstream need length n");
  }
  const std::size_t b = m.b();
  const std::size_t q = m.q();
  const BlockPermutation p(b, n);

  const std::vector<T> y = bd_matvec(m.r(), x);
  const std::vector<T> yp = p.permute(std::span<const T>(y));
  const std::vector<T> gz = p.permute(upstream);

  MonarchTangent<T> t{BlockDiagMatrix<T>(q, q, b), BlockDiagMatrix<T>(b, b, q), {}};
  std::vector<T> gyp(n);
  parallel_for(b, threads, [&](std::size_t j) {
    DenseMatrix<T>& d = t.dltilde.block(j);
    const DenseMatrix<T>& lj = m.ltilde().block(j);
    for (std::size_t l = 0; l < q; ++l)
      for (std::size_t k = 0; k < q; ++k) d(l, k) = gz[j * q + l] * conj_if(yp[j * q + k]);
    for (std::size_t k = 0; k < q; ++k) {
      T acc{};
      for (std::size_t l = 0; l < q; ++l) acc += conj_if(lj(l, k)) * gz[j * q + l];
      gyp[j * q + k] = acc;
    }
  });
  const std::vector<T> gy = p.permute_transpose(std::span<const T>(gyp));
  parallel_for(q, threads, [&](std::size_t k) {
    DenseMatrix<T>& d = t.dr.block(k);
    for (std::size_t j = 0; j < b; ++j)
      for (std::size_t i = 0; i < b; ++i) d(j, i) = gy[k * b + j] * conj_if(x[k * b + i]);
  });
  t.dx = bd_adjoint_matvec(m.r(), std::span<const T>(gy));
  return t;
}

GradcheckReport gradcheck_tangent(const MonarchMatrix<double>& m, std::span<const double> x,
                                  std::span<const double> upstream, const MonarchTangent<double>& tangent) {
  MonarchMatrix<double> work = m;
  std::vector<double> xw(x.begin(), x.end());
  GradcheckReport rep;

  auto check = [&](double& theta, double analytic, Coordinate where) {
    const double saved = theta;
    const double h = kGradcheckStep * std::max(1.0, std::abs(saved));
    theta = saved + h;
    const long double fp = bilinear_form(work, xw, upstream);
    theta = saved - h;
    const long double fm = bilinear_form(work, xw, upstream);
    theta = saved;
    const double numeric = static_cast<double>((fp - fm) / (2.0L * h));
    const double diff = std::abs(analytic - numeric);
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    const double rel = scale > 0.0 ? diff / scale : 0.0;
    const bool ok = rel <= kGradcheckRelTol || diff <= kGradcheckAbsFloor;
    ++rep.checked;
    if (rep.checked == 1 || rel > rep.max_rel_error) {
      rep.max_rel_error = rel;
      rep.worst = where;
    }
    if (!ok) {
      rep.pass = false;
      rep.failures.push_back({where, analytic, numeric, rel, false});
    }
  };

  const std::size_t b = m.b();
  const std::size_t q = m.q();
  for (std::size_t j = 0; j < b; ++j)
    for (std::size_t l = 0; l < q; ++l)
      for (std::size_t k = 0; k < q; ++k)
        check(work.ltilde().block(j)(l, k), tangent.dltilde.block(j)(l, k), {ParamKind::Ltilde, j, l, k});
  for (std::size_t k = 0; k < q; ++k)
    for (std::size_t j = 0; j < b; ++j)
      for (std::size_t i = 0; i < b; ++i) check(work.r().block(k)(j, i), tangent.dr.block(k)(j, i), {ParamKind::R, k, j, i});
  for (std::size_t i = 0; i < xw.size(); ++i) check(xw[i], tangent.dx[i], {ParamKind::X, 0, 0, i});
  return rep;
}

GradcheckReport gradcheck(const MonarchMatrix<double>& m, std::span<const double> x, std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<double> u = rng.vector<double>(m.n());
  const MonarchTangent<double> t = matvec_vjp(m, x, std::span<const double>(u));
  return gradcheck_tangent(m, x, u, t);
}

template MonarchTangent<double> matvec_vjp(const MonarchMatrix<double>&, std::span<const double>,
                                           std::span<const double>, int);
template MonarchTangent<cplx> matvec_vjp(const MonarchMatrix<cplx>&, std::span<const cplx>, std::span<const cplx>,
                                         int);

}  // namespace monarch
