#include "monarch/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace monarch {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::NonFinite: return "NON_FINITE";
    case ErrorCode::Singular: return "SINGULAR";
    case ErrorCode::NoConvergence: return "NO_CONVERGENCE";
    case ErrorCode::Defective: return "DEFECTIVE";
    case ErrorCode::IndexOutOfRange: return "INDEX_OUT_OF_RANGE";
    case ErrorCode::BadBlocking: return "BAD_BLOCKING";
    case ErrorCode::UnsupportedBlocking: return "UNSUPPORTED_BLOCKING";
    case ErrorCode::BadSize: return "BAD_SIZE";
    case ErrorCode::SingularBlock: return "SINGULAR_BLOCK";
    case ErrorCode::SimdiagFailed: return "SIMDIAG_FAILED";
  }
  return "UNKNOWN";
}

template <Scalar T>
DenseMatrix<T>::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<T> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::DimensionMismatch, "data length " + std::to_string(data_.size()) +
                                                  " != " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  for (const T& v : data_) {
    if (!is_finite(v)) throw Error(ErrorCode::NonFinite, "matrix entry is NaN or Inf");
  }
}

template <Scalar T>
DenseMatrix<T> DenseMatrix<T>::identity(std::size_t n) {
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = T(1.0);
  return out;
}

template <Scalar T>
std::vector<T> DenseMatrix<T>::column(std::size_t j) const {
  std::vector<T> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

template <Scalar T>
void DenseMatrix<T>::set_column(std::size_t j, std::span<const T> values) {
  if (values.size() != rows_) throw Error(ErrorCode::DimensionMismatch, "set_column length");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
}

template <Scalar T>
DenseMatrix<T> DenseMatrix<T>::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_) throw Error(ErrorCode::IndexOutOfRange, "block outside matrix");
  DenseMatrix out(nr, nc);
  for (std::size_t i = 0; i < nr; ++i) {
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>((r0 + i) * cols_ + c0), nc, out.row(i).begin());
  }
  return out;
}

template <Scalar T>
void DenseMatrix<T>::set_block(std::size_t r0, std::size_t c0, const DenseMatrix& src) {
  if (r0 + src.rows() > rows_ || c0 + src.cols() > cols_) {
    throw Error(ErrorCode::IndexOutOfRange, "set_block outside matrix");
  }
  for (std::size_t i = 0; i < src.rows(); ++i) {
    std::copy(src.row(i).begin(), src.row(i).end(), row(r0 + i).begin() + static_cast<std::ptrdiff_t>(c0));
  }
}

template <Scalar T>
DenseMatrix<T> matmul(const DenseMatrix<T>& a, const DenseMatrix<T>& b, OpCounter* counter) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "matmul " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                                  " by " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  DenseMatrix<T> c(a.rows(), b.cols());
  // i-k-j order: each c(i,j) still accumulates over k in increasing order.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto crow = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T aik = a(i, k);
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
    }
  }
  tally(counter, a.rows() * a.cols() * b.cols());
  return c;
}

template <Scalar T>
std::vector<T> matvec(const DenseMatrix<T>& a, std::span<const T> x, OpCounter* counter) {
  if (x.size() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "matvec length");
  std::vector<T> y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    T acc{};
    auto r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) acc += r[j] * x[j];
    y[i] = acc;
  }
  tally(counter, a.rows() * a.cols());
  return y;
}

template <Scalar T>
DenseMatrix<T> adjoint(const DenseMatrix<T>& a) {
  DenseMatrix<T> out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = conj_of(a(i, j));
  return out;
}

template <Scalar T>
DenseMatrix<T> transpose(const DenseMatrix<T>& a) {
  DenseMatrix<T> out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

template <Scalar T>
DenseMatrix<T> add(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorCode::DimensionMismatch, "add shapes");
  DenseMatrix<T> out = a;
  for (std::size_t k = 0; k < out.size(); ++k) out.data()[k] += b.data()[k];
  return out;
}

template <Scalar T>
DenseMatrix<T> subtract(const DenseMatrix<T>& a, const DenseMatrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorCode::DimensionMismatch, "subtract shapes");
  DenseMatrix<T> out = a;
  for (std::size_t k = 0; k < out.size(); ++k) out.data()[k] -= b.data()[k];
  return out;
}

template <Scalar T>
DenseMatrix<T> scale(const DenseMatrix<T>& a, T alpha) {
  DenseMatrix<T> out = a;
  for (T& v : out.data()) v *= alpha;
  return out;
}

template <Scalar T>
double frobenius_norm(const DenseMatrix<T>& a) {
  // Scaled sum of squares to avoid overflow on large entries.
  double scale_v = 0.0;
  double ssq = 1.0;
  for (const T& v : a.data()) {
    const double parts[2] = {std::real(v), std::imag(v)};
    for (double p : parts) {
      if (p == 0.0) continue;
      const double ap = std::abs(p);
      if (scale_v < ap) {
        ssq = 1.0 + ssq * (scale_v / ap) * (scale_v / ap);
        scale_v = ap;
      } else {
        ssq += (ap / scale_v) * (ap / scale_v);
      }
    }
  }
  return scale_v * std::sqrt(ssq);
}

template <Scalar T>
double max_abs(const DenseMatrix<T>& a) {
  double m = 0.0;
  for (const T& v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

template <Scalar T>
double norm2(std::span<const T> x) {
  double s = 0.0;
  for (const T& v : x) s += abs2(v);
  return std::sqrt(s);
}

template <Scalar T>
DenseMatrix<T> lu_invert(const DenseMatrix<T>& a, OpCounter* counter) {
  if (!a.is_square()) throw Error(ErrorCode::DimensionMismatch, "lu_invert needs a square matrix");
  const std::size_t n = a.rows();
  const double threshold = kSingularPivotRatio * max_abs(a);
  DenseMatrix<T> work = a;
  DenseMatrix<T> inv = DenseMatrix<T>::identity(n);
  std::uint64_t ops = 0;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double best = std::abs(work(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      const double m = std::abs(work(r, col));
      if (m > best) {
        best = m;
        piv = r;
      }
    }
    if (best <= threshold || best == 0.0) {
      throw Error(ErrorCode::Singular, "pivot " + std::to_string(best) + " at column " + std::to_string(col));
    }
    if (piv != col) {
      std::swap_ranges(work.row(col).begin(), work.row(col).end(), work.row(piv).begin());
      std::swap_ranges(inv.row(col).begin(), inv.row(col).end(), inv.row(piv).begin());
    }
    const T pinv = T(1.0) / work(col, col);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const T f = work(r, col) * pinv;
      if (f == T(0.0)) continue;
      for (std::size_t c = col; c < n; ++c) work(r, c) -= f * work(col, c);
      for (std::size_t c = 0; c < n; ++c) inv(r, c) -= f * inv(col, c);
      ops += (n - col) + n + 1;
    }
    for (std::size_t c = 0; c < n; ++c) inv(col, c) *= pinv;
    for (std::size_t c = col; c < n; ++c) work(col, c) *= pinv;
    ops += 2 * n;
  }
  tally(counter, ops);
  return inv;
}

namespace {

template <Scalar T>
double norm_1(const DenseMatrix<T>& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

template <Scalar T>
double condition_1norm(const DenseMatrix<T>& a) {
  try {
    return norm_1(a) * norm_1(lu_invert(a));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Singular) return std::numeric_limits<double>::infinity();
    throw;
  }
}

template <Scalar T>
DenseMatrix<cplx> to_complex(const DenseMatrix<T>& a) {
  if constexpr (is_complex_v<T>) {
    return a;
  } else {
    DenseMatrix<cplx> out(a.rows(), a.cols());
    for (std::size_t k = 0; k < a.size(); ++k) out.data()[k] = cplx(a.data()[k], 0.0);
    return out;
  }
}

#define MONARCH_INSTANTIATE_NUMERICS(T)                                                         \
  template class DenseMatrix<T>;                                                                \
  template DenseMatrix<T> matmul(const DenseMatrix<T>&, const DenseMatrix<T>&, OpCounter*);     \
  template std::vector<T> matvec(const DenseMatrix<T>&, std::span<const T>, OpCounter*);        \
  template DenseMatrix<T> adjoint(const DenseMatrix<T>&);                                       \
  template DenseMatrix<T> transpose(const DenseMatrix<T>&);                                     \
  template DenseMatrix<T> add(const DenseMatrix<T>&, const DenseMatrix<T>&);                    \
  template DenseMatrix<T> subtract(const DenseMatrix<T>&, const DenseMatrix<T>&);               \
  template DenseMatrix<T> scale(const DenseMatrix<T>&, T);                                      \
  template double frobenius_norm(const DenseMatrix<T>&);                                        \
  template double max_abs(const DenseMatrix<T>&);                                               \
  template double norm2(std::span<const T>);                                                    \
  template DenseMatrix<T> lu_invert(const DenseMatrix<T>&, OpCounter*);                         \
  template double condition_1norm(const DenseMatrix<T>&);                                       \
  template DenseMatrix<cplx> to_complex(const DenseMatrix<T>&);

MONARCH_INSTANTIATE_NUMERICS(double)
MONARCH_INSTANTIATE_NUMERICS(cplx)

}  // namespace monarch
