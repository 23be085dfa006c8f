#pragma once

// Monarch matrices M = P^T Ltilde P R with P = P_(b,n), Ltilde in BD(n/b, n)
// and R in BD(b, n), plus the product classes built from them.
//
// Entry identity: M[l*b + j, k*b + i] = Ltilde_j[l, k] * R_k[j, i].

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "monarch/structured.hpp"

namespace monarch {

template <Scalar T>
class MonarchMatrix {
 public:
  MonarchMatrix() = default;
  /// r: n/b blocks of b x b. ltilde: b blocks of (n/b) x (n/b).
  /// Throws BadBlocking unless 1 < b < n.
  MonarchMatrix(BlockDiagMatrix<T> ltilde, BlockDiagMatrix<T> r);

  static MonarchMatrix identity(std::size_t n, std::size_t b);

  std::size_t n() const noexcept { return r_.rows(); }
  std::size_t b() const noexcept { return r_.block_rows(); }
  /// n / b, the size of each Ltilde block.
  std::size_t q() const noexcept { return r_.num_blocks(); }

  const BlockDiagMatrix<T>& ltilde() const noexcept { return ltilde_; }
  const BlockDiagMatrix<T>& r() const noexcept { return r_; }
  BlockDiagMatrix<T>& ltilde() noexcept { return ltilde_; }
  BlockDiagMatrix<T>& r() noexcept { return r_; }

  friend bool operator==(const MonarchMatrix&, const MonarchMatrix&) = default;

 private:
  BlockDiagMatrix<T> ltilde_;
  BlockDiagMatrix<T> r_;
};

/// n^2/b + n*b.
std::uint64_t monarch_param_count(std::size_t n, std::size_t b);
/// n*b + n^2/b scalar multiplies per matvec.
std::uint64_t monarch_flop_count(std::size_t n, std::size_t b);

template <Scalar T>
std::uint64_t monarch_param_count(const MonarchMatrix<T>& m) {
  return monarch_param_count(m.n(), m.b());
}
template <Scalar T>
std::uint64_t monarch_flop_count(const MonarchMatrix<T>& m) {
  return monarch_flop_count(m.n(), m.b());
}

/// sqrt(n) when n is a perfect square; BadBlocking otherwise.
std::size_t default_block_size(std::size_t n);

/// Validates 1 < b < n and b | n.
void require_monarch_blocking(std::size_t n, std::size_t b);

template <Scalar T>
std::vector<T> monarch_matvec(const MonarchMatrix<T>& m, std::span<const T> x, OpCounter* counter = nullptr,
                              int threads = 1);

/// M^* x = R^* P^T Ltilde^* P x.
template <Scalar T>
std::vector<T> monarch_adjoint_matvec(const MonarchMatrix<T>& m, std::span<const T> x, OpCounter* counter = nullptr);

/// M X for an n x k block of columns; columns run in parallel.
template <Scalar T>
DenseMatrix<T> monarch_matmat(const MonarchMatrix<T>& m, const DenseMatrix<T>& x, int threads = 1);

template <Scalar T>
DenseMatrix<T> monarch_to_dense(const MonarchMatrix<T>& m);

enum class ProductKind { MmStar, MstarM, Hierarchy };

template <Scalar T>
struct ProductFactor {
  MonarchMatrix<T> matrix;
  bool adjoint = false;
};

/// Ordered product of Monarch factors (left to right), evaluated on the
/// leading n x n corner. Factors share one size N = n * expansion.
template <Scalar T>
class MonarchProduct {
 public:
  MonarchProduct(ProductKind kind, std::vector<ProductFactor<T>> factors, std::size_t n);

  /// M1 M2^*.
  static MonarchProduct mm_star(MonarchMatrix<T> m1, MonarchMatrix<T> m2);
  /// M1^* M2.
  static MonarchProduct mstar_m(MonarchMatrix<T> m1, MonarchMatrix<T> m2);
  /// prod_i (A_i B_i^*) restricted to the leading n x n corner.
  static MonarchProduct hierarchy(std::vector<std::pair<MonarchMatrix<T>, MonarchMatrix<T>>> pairs, std::size_t n);

  ProductKind kind() const noexcept { return kind_; }
  const std::vector<ProductFactor<T>>& factors() const noexcept { return factors_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t inner_size() const noexcept { return factors_.front().matrix.n(); }
  std::size_t expansion() const noexcept { return inner_size() / n_; }
  std::size_t width() const noexcept;

 private:
  ProductKind kind_;
  std::vector<ProductFactor<T>> factors_;
  std::size_t n_;
};

/// Right-to-left application. x is zero-padded to the inner size and the
/// result truncated to n.
template <Scalar T>
std::vector<T> product_matvec(const MonarchProduct<T>& p, std::span<const T> x, OpCounter* counter = nullptr);

template <Scalar T>
DenseMatrix<T> product_to_dense(const MonarchProduct<T>& p);

/// For M = M1 M2^* in MM*(b,n), returns (N1, N2) of block size n/b with
/// P_(b,n) M P_(b,n)^T = N1^* N2.
template <Scalar T>
std::pair<MonarchMatrix<T>, MonarchMatrix<T>> mm_star_to_mstar_m(const MonarchMatrix<T>& m1,
                                                                const MonarchMatrix<T>& m2);

enum class MonarchConstraint {
  None,
  /// R entries |r| >= 0.1 and Ltilde blocks with 1-norm condition <= 1e4.
  Assumption1,
};

inline constexpr double kMinREntry = 0.1;
inline constexpr double kMaxLtildeCondition = 1e4;

/// I.i.d. standard normal factors (complex: independent parts), with
/// rejection resampling under Assumption1. Deterministic for a given seed.
template <Scalar T>
MonarchMatrix<T> random_monarch(std::size_t n, std::size_t b, std::uint64_t seed,
                                MonarchConstraint constraint = MonarchConstraint::None);

/// M1 M2^* with both factors under Assumption1 and every entry of the
/// middle factor R1 R2^* of magnitude >= 0.1.
template <Scalar T>
MonarchProduct<T> random_mm_star(std::size_t n, std::size_t b, std::uint64_t seed);

}  // namespace monarch
