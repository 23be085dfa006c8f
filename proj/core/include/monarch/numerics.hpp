#pragma once

// Dense linear algebra over double and std::complex<double>: the substrate
// for every structured type in the library and the oracle layer its tests
// compare against.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "monarch/error.hpp"
#include "monarch/scalar.hpp"

namespace monarch {

/// Tally of scalar multiplies performed by an instrumented kernel. Shared by
/// pointer; safe to bump from several threads.
class OpCounter {
 public:
  void add(std::uint64_t k) noexcept { count_.fetch_add(k, std::memory_order_relaxed); }
  std::uint64_t value() const noexcept { return count_.load(std::memory_order_relaxed); }
  void reset() noexcept { count_.store(0, std::memory_order_relaxed); }

 private:
  std::atomic<std::uint64_t> count_{0};
};

inline void tally(OpCounter* counter, std::uint64_t k) {
  if (counter != nullptr) counter->add(k);
}

/// Row-major dense matrix.
template <Scalar T>
class DenseMatrix {
 public:
  using value_type = T;
  static constexpr Field field = field_of_v<T>;

  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  /// Throws DimensionMismatch when data.size() != rows*cols and NonFinite on NaN/Inf.
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<T> data);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::vector<T> column(std::size_t j) const;
  void set_column(std::size_t j, std::span<const T> values);

  DenseMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  void set_block(std::size_t r0, std::size_t c0, const DenseMatrix& src);

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <Scalar T>
struct SvdResult {
  DenseMatrix<T> u;       // rows x k, orthonormal columns, k = min(rows, cols)
  std::vector<double> s;  // length k, descending
  DenseMatrix<T> v;       // cols x k, orthonormal columns
  int sweeps = 0;
};

struct EigResult {
  DenseMatrix<cplx> q;        // eigenvectors as unit-norm columns
  std::vector<cplx> lambda;   // unsorted
  double condition = 1.0;     // 2-norm condition of q
};

template <Scalar T>
struct Rank1 {
  std::vector<T> u;  // scaled by the leading singular value
  std::vector<T> v;  // unit norm, largest-magnitude entry real positive
};

inline constexpr int kSvdMaxSweeps = 60;
inline constexpr double kSingularPivotRatio = 1e-12;
inline constexpr double kDefectiveCondition = 1e10;

template <Scalar T>
DenseMatrix<T> matmul(const DenseMatrix<T>& a, const DenseMatrix<T>& b, OpCounter* counter = nullptr);

template <Scalar T>
std::vector<T> matvec(const DenseMatrix<T>& a, std::span<const T> x, OpCounter* counter = nullptr);

template <Scalar T>
DenseMatrix<T> adjoint(const DenseMatrix<T>& a);

template <Scalar T>
DenseMatrix<T> transpose(const DenseMatrix<T>& a);

template <Scalar T>
DenseMatrix<T> add(const DenseMatrix<T>& a, const DenseMatrix<T>& b);

template <Scalar T>
DenseMatrix<T> subtract(const DenseMatrix<T>& a, const DenseMatrix<T>& b);

template <Scalar T>
DenseMatrix<T> scale(const DenseMatrix<T>& a, T alpha);

template <Scalar T>
double frobenius_norm(const DenseMatrix<T>& a);

template <Scalar T>
double max_abs(const DenseMatrix<T>& a);

template <Scalar T>
double norm2(std::span<const T> x);

/// Partial-pivot LU inversion. Throws Singular when a pivot falls below
/// kSingularPivotRatio * max|a|.
template <Scalar T>
DenseMatrix<T> lu_invert(const DenseMatrix<T>& a, OpCounter* counter = nullptr);

/// kappa_1(a) = |a|_1 |a^-1|_1; +inf for singular input.
template <Scalar T>
double condition_1norm(const DenseMatrix<T>& a);

/// One-sided (Hestenes) Jacobi SVD.
template <Scalar T>
SvdResult<T> svd(const DenseMatrix<T>& a, OpCounter* counter = nullptr);

/// Best rank-1 approximation u v^* in Frobenius norm.
template <Scalar T>
Rank1<T> rank1_approx(const DenseMatrix<T>& a, OpCounter* counter = nullptr);

/// Eigendecomposition through Hessenberg reduction and shifted complex QR.
/// Throws NoConvergence or Defective.
template <Scalar T>
EigResult eig(const DenseMatrix<T>& a, OpCounter* counter = nullptr);

template <Scalar T>
DenseMatrix<cplx> to_complex(const DenseMatrix<T>& a);

}  // namespace monarch
