#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "monarch/numerics.hpp"

namespace monarch {
namespace {

template <Scalar T>
using Columns = std::vector<std::vector<T>>;

template <Scalar T>
double sq_norm(const std::vector<T>& x) {
  double s = 0.0;
  for (const T& v : x) s += abs2(v);
  return s;
}

// Hestenes iteration on a matrix with at least as many rows as columns.
template <Scalar T>
SvdResult<T> jacobi_tall(const DenseMatrix<T>& a, OpCounter* counter) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  Columns<T> w(n, std::vector<T>(m));
  Columns<T> v(n, std::vector<T>(n, T(0.0)));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) w[j][i] = a(i, j);
    v[j][j] = T(1.0);
  }

  const double tol = std::numeric_limits<double>::epsilon() * static_cast<double>(std::max<std::size_t>(m, 1));
  // Columns below this norm are rounding noise from rank deficiency; they are
  // neither rotated nor normalized into U.
  double fro2 = 0.0;
  for (const auto& col : w) fro2 += sq_norm(col);
  const double negligible = tol * tol * fro2;
  std::uint64_t ops = 0;
  int sweeps = 0;
  bool converged = n < 2;
  while (!converged) {
    if (sweeps == kSvdMaxSweeps) {
      tally(counter, ops);
      throw Error(ErrorCode::NoConvergence, "Jacobi SVD did not converge in " + std::to_string(kSvdMaxSweeps) + " sweeps");
    }
    ++sweeps;
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto& wp = w[p];
        auto& wq = w[q];
        double alpha = 0.0;
        double beta = 0.0;
        T gamma{};
        for (std::size_t i = 0; i < m; ++i) {
          alpha += abs2(wp[i]);
          beta += abs2(wq[i]);
          gamma += conj_of(wp[i]) * wq[i];
        }
        ops += 3 * m;
        const double g = std::abs(gamma);
        if (g == 0.0 || g <= tol * std::sqrt(alpha * beta)) continue;
        if (alpha <= negligible || beta <= negligible) continue;
        rotated = true;

        const double zeta = (beta - alpha) / (2.0 * g);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        const T ph = gamma / g;
        const T s_ph = s * ph;
        const T s_phc = s * conj_of(ph);
        for (std::size_t i = 0; i < m; ++i) {
          const T x = wp[i];
          const T y = wq[i];
          wp[i] = c * x - s_phc * y;
          wq[i] = s_ph * x + c * y;
        }
        auto& vp = v[p];
        auto& vq = v[q];
        for (std::size_t i = 0; i < n; ++i) {
          const T x = vp[i];
          const T y = vq[i];
          vp[i] = c * x - s_phc * y;
          vq[i] = s_ph * x + c * y;
        }
        ops += 4 * (m + n);
      }
    }
    converged = !rotated;
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = std::sqrt(sq_norm(w[j]));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  SvdResult<T> out;
  out.u = DenseMatrix<T>(m, n);
  out.v = DenseMatrix<T>(n, n);
  out.s.resize(n);
  out.sweeps = sweeps;
  std::vector<bool> filled(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.s[k] = sigma[j];
    for (std::size_t i = 0; i < n; ++i) out.v(i, k) = v[j][i];
    if (sigma[j] * sigma[j] > negligible) {
      for (std::size_t i = 0; i < m; ++i) out.u(i, k) = w[j][i] / sigma[j];
      filled[k] = true;
    }
  }

  // Zero singular values leave U columns undetermined; complete them to an
  // orthonormal set with Gram-Schmidt over the standard basis.
  std::size_t candidate = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (filled[k]) continue;
    while (candidate < m) {
      std::vector<T> e(m, T(0.0));
      e[candidate++] = T(1.0);
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t c = 0; c < n; ++c) {
          if (!filled[c]) continue;
          T dot{};
          for (std::size_t i = 0; i < m; ++i) dot += conj_of(out.u(i, c)) * e[i];
          for (std::size_t i = 0; i < m; ++i) e[i] -= dot * out.u(i, c);
        }
      }
      const double nrm = std::sqrt(sq_norm(e));
      if (nrm > 0.5) {
        for (std::size_t i = 0; i < m; ++i) out.u(i, k) = e[i] / nrm;
        filled[k] = true;
        break;
      }
    }
  }
  tally(counter, ops);
  return out;
}

}  // namespace

template <Scalar T>
SvdResult<T> svd(const DenseMatrix<T>& a, OpCounter* counter) {
  if (a.rows() >= a.cols()) return jacobi_tall(a, counter);
  // A^* = U' S V'^*  =>  A = V' S U'^*
  SvdResult<T> t = jacobi_tall(adjoint(a), counter);
  std::swap(t.u, t.v);
  return t;
}

template <Scalar T>
Rank1<T> rank1_approx(const DenseMatrix<T>& a, OpCounter* counter) {
  Rank1<T> out;
  out.u.assign(a.rows(), T(0.0));
  out.v.assign(a.cols(), T(0.0));
  if (a.rows() == 0 || a.cols() == 0) return out;
  const SvdResult<T> d = svd(a, counter);
  if (d.s.empty() || d.s[0] == 0.0) return out;

  std::size_t lead = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < a.cols(); ++i) {
    const double m = std::abs(d.v(i, 0));
    if (m > best) {
      best = m;
      lead = i;
    }
  }
  // Fix the phase so the largest entry of v is real positive.
  const T g = conj_of(phase_of(d.v(lead, 0)));
  for (std::size_t i = 0; i < a.cols(); ++i) out.v[i] = d.v(i, 0) * g;
  for (std::size_t i = 0; i < a.rows(); ++i) out.u[i] = d.u(i, 0) * (d.s[0] * g);
  if constexpr (is_complex_v<T>) out.v[lead] = T(out.v[lead].real(), 0.0);
  return out;
}

template SvdResult<double> svd(const DenseMatrix<double>&, OpCounter*);
template SvdResult<cplx> svd(const DenseMatrix<cplx>&, OpCounter*);
template Rank1<double> rank1_approx(const DenseMatrix<double>&, OpCounter*);
template Rank1<cplx> rank1_approx(const DenseMatrix<cplx>&, OpCounter*);

}  // namespace monarch
