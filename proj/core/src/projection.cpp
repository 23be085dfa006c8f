#include "monarch/projection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "monarch/parallel.hpp"

namespace monarch {
namespace {

template <Scalar T>
void require_square_blocking(const DenseMatrix<T>& a, std::size_t b) {
  if (!a.is_square()) throw Error(ErrorCode::DimensionMismatch, "projection needs a square matrix");
  require_monarch_blocking(a.rows(), b);
}

}  // namespace

double ProjectionReport::max_slice_residual() const noexcept {
  double m = 0.0;
  for (double r : per_slice_residuals) m = std::max(m, r);
  return m;
}

template <Scalar T>
DenseMatrix<T> slice_view(const DenseMatrix<T>& a, std::size_t b, std::size_t j, std::size_t k) {
  require_square_blocking(a, b);
  const std::size_t q = a.rows() / b;
  if (j >= b || k >= q) {
    throw Error(ErrorCode::IndexOutOfRange,
                "slice (" + std::to_string(j) + "," + std::to_string(k) + ") outside " + std::to_string(b) + "x" +
                    std::to_string(q));
  }
  DenseMatrix<T> s(q, b);
  for (std::size_t l = 0; l < q; ++l)
    for (std::size_t i = 0; i < b; ++i) s(l, i) = a(l * b + j, k * b + i);
  return s;
}

template <Scalar T>
ProjectionResult<T> project(const DenseMatrix<T>& a, std::size_t b, OpCounter* counter, int threads) {
  require_square_blocking(a, b);
  const std::size_t n = a.rows();
  const std::size_t q = n / b;
  BlockDiagMatrix<T> ltilde(q, q, b);
  BlockDiagMatrix<T> r(b, b, q);
  std::vector<double> slice_res(b * q);

  // Slice (j, k) writes column k of Ltilde_j and row j of R_k only.
  parallel_for(b * q, threads, [&](std::size_t idx) {
    const std::size_t j = idx / q;
    const std::size_t k = idx % q;
    const DenseMatrix<T> s = slice_view(a, b, j, k);
    const Rank1<T> r1 = rank1_approx(s, counter);
    for (std::size_t l = 0; l < q; ++l) ltilde.block(j)(l, k) = r1.u[l];
    for (std::size_t i = 0; i < b; ++i) r.block(k)(j, i) = conj_of(r1.v[i]);
    double acc = 0.0;
    for (std::size_t l = 0; l < q; ++l)
      for (std::size_t i = 0; i < b; ++i) acc += abs2(s(l, i) - r1.u[l] * conj_of(r1.v[i]));
    slice_res[idx] = std::sqrt(acc);
  });

  ProjectionReport report;
  report.input_norm = frobenius_norm(a);
  report.block_size = b;
  double total = 0.0;
  for (double v : slice_res) total += v * v;
  report.residual = std::sqrt(total);
  report.per_slice_residuals = std::move(slice_res);
  return {MonarchMatrix<T>(std::move(ltilde), std::move(r)), std::move(report)};
}

template <Scalar T>
double max_slice_rank_ratio(const DenseMatrix<T>& a, std::size_t b) {
  require_square_blocking(a, b);
  const std::size_t q = a.rows() / b;
  double worst = 0.0;
  for (std::size_t j = 0; j < b; ++j)
    for (std::size_t k = 0; k < q; ++k) {
      const auto s = svd(slice_view(a, b, j, k)).s;
      if (s.size() < 2 || s[0] == 0.0) continue;
      worst = std::max(worst, s[1] / s[0]);
    }
  return worst;
}

#define MONARCH_INSTANTIATE_PROJECTION(T)                                                           \
  template DenseMatrix<T> slice_view(const DenseMatrix<T>&, std::size_t, std::size_t, std::size_t); \
  template ProjectionResult<T> project(const DenseMatrix<T>&, std::size_t, OpCounter*, int);         \
  template double max_slice_rank_ratio(const DenseMatrix<T>&, std::size_t);

MONARCH_INSTANTIATE_PROJECTION(double)
MONARCH_INSTANTIATE_PROJECTION(cplx)

}  // namespace monarch
