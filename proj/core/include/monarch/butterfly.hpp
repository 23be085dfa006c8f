#pragma once

// Butterfly factor matrices BF(n, k) = I_(n/k) (x) [[D1, D2], [D3, D4]] with
// diagonal D's of size k/2, butterfly matrices B_n ... B_2, and their
// conversion to Monarch form.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "monarch/indexing.hpp"
#include "monarch/monarch.hpp"

namespace monarch {

template <Scalar T>
class ButterflyFactor {
 public:
  ButterflyFactor() = default;
  /// Identity factor. BadSize unless k is even and k | n.
  ButterflyFactor(std::size_t n, std::size_t k);

  std::size_t n() const noexcept { return n_; }
  std::size_t k() const noexcept { return k_; }

  /// Diagonal q in {0,1,2,3} for D1..D4. Entry g*(k/2) + t belongs to
  /// sub-factor g, position t.
  std::span<T> diag(int q) { return d_.at(static_cast<std::size_t>(q)); }
  std::span<const T> diag(int q) const { return d_.at(static_cast<std::size_t>(q)); }

  /// y = B x, 2n multiplies.
  std::vector<T> apply(std::span<const T> x, OpCounter* counter = nullptr) const;
  DenseMatrix<T> to_dense() const;

  friend bool operator==(const ButterflyFactor&, const ButterflyFactor&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t k_ = 0;
  std::array<std::vector<T>, 4> d_;
};

template <Scalar T>
class ButterflyMatrix {
 public:
  /// factors ordered [B_n, B_(n/2), ..., B_2]; validated against n.
  ButterflyMatrix(std::size_t n, std::vector<ButterflyFactor<T>> factors);

  static ButterflyMatrix identity(std::size_t n);

  std::size_t n() const noexcept { return n_; }
  const std::vector<ButterflyFactor<T>>& factors() const noexcept { return factors_; }
  /// The factor B_k.
  const ButterflyFactor<T>& factor(std::size_t k) const;
  ButterflyFactor<T>& factor(std::size_t k);

  friend bool operator==(const ButterflyMatrix&, const ButterflyMatrix&) = default;

 private:
  std::size_t n_;
  std::vector<ButterflyFactor<T>> factors_;
};

/// Applies B_2 first and B_n last.
template <Scalar T>
std::vector<T> butterfly_matvec(const ButterflyMatrix<T>& bm, std::span<const T> x, OpCounter* counter = nullptr);

template <Scalar T>
DenseMatrix<T> butterfly_to_dense(const ButterflyMatrix<T>& bm);

/// R = B_b ... B_2 and L = B_n ... B_2b, returned as the Monarch pair
/// (Ltilde = P L P^T, R). BadBlocking unless b is a power of 2 with 1 < b < n.
template <Scalar T>
MonarchMatrix<T> butterfly_to_monarch(const ButterflyMatrix<T>& bm, std::size_t b);

struct DftButterfly {
  ButterflyMatrix<cplx> butterfly;
  PermutationChain bit_reversal;
};

/// Radix-2 decimation in time: dense(butterfly) * P_bitrev equals the
/// unnormalized DFT with entries exp(-2 pi i jk / n). BadSize unless n is a
/// power of 2.
DftButterfly dft_butterfly(std::size_t n);

/// Unnormalized DFT matrix, evaluated directly.
DenseMatrix<cplx> dft_matrix(std::size_t n);

/// Sylvester Hadamard H_n as a butterfly (D1 = D2 = D3 = I, D4 = -I).
ButterflyMatrix<double> hadamard_butterfly(std::size_t n);

template <Scalar T>
ButterflyMatrix<T> random_butterfly(std::size_t n, std::uint64_t seed);

bool is_power_of_two(std::size_t n) noexcept;

}  // namespace monarch
