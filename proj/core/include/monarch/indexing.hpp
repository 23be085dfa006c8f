#pragma once

// Block-form index arithmetic and the block-transpose permutations
// sigma_(b,n)(i1*b + i0) = i0*(n/b) + i1.
//
// Matrix convention: P[sigma(i), i] = 1, so (P x)[sigma(i)] = x[i] and
// (P A P^T)[sigma(i), sigma(j)] = A[i, j].

#include <cstddef>
#include <span>
#include <vector>

#include "monarch/numerics.hpp"

namespace monarch {

struct BlockForm {
  std::size_t i1 = 0;  // quotient
  std::size_t i0 = 0;  // remainder
  std::size_t b = 1;

  std::size_t flat() const noexcept { return i1 * b + i0; }
  friend bool operator==(const BlockForm&, const BlockForm&) = default;
};

BlockForm block_form(std::size_t i, std::size_t b);

class BlockPermutation {
 public:
  /// Requires 1 <= b <= n and b | n; throws BadBlocking otherwise.
  BlockPermutation(std::size_t b, std::size_t n);

  std::size_t block() const noexcept { return b_; }
  std::size_t size() const noexcept { return n_; }

  /// sigma(i); throws IndexOutOfRange for i >= n.
  std::size_t apply(std::size_t i) const;
  std::span<const std::size_t> table() const noexcept { return table_; }

  /// sigma_(b,n)^-1 = sigma_(n/b,n).
  BlockPermutation inverse() const { return BlockPermutation(n_ / b_, n_); }

  /// out = P x, i.e. out[sigma(i)] = x[i].
  template <Scalar T>
  std::vector<T> permute(std::span<const T> x) const;
  /// out = P^T x, i.e. out[i] = x[sigma(i)].
  template <Scalar T>
  std::vector<T> permute_transpose(std::span<const T> x) const;

  template <Scalar T>
  DenseMatrix<T> to_dense() const;

 private:
  std::size_t b_;
  std::size_t n_;
  std::vector<std::size_t> table_;
};

/// out[sigma(i), :] = a[i, :]  (P a).
template <Scalar T>
DenseMatrix<T> permute_rows(const BlockPermutation& p, const DenseMatrix<T>& a);

/// out[:, sigma(j)] = a[:, j]  (a P^T).
template <Scalar T>
DenseMatrix<T> permute_cols(const BlockPermutation& p, const DenseMatrix<T>& a);

/// P a P^T.
template <Scalar T>
DenseMatrix<T> conjugate_by(const BlockPermutation& p, const DenseMatrix<T>& a);

/// A permutation built as a sequence of stages; each stage applies one block
/// permutation independently to every contiguous chunk of stage.size()
/// entries. The radix-2 bit reversal is the chain
/// P_(2,n), I_2 (x) P_(2,n/2), ..., I_(n/4) (x) P_(2,4).
class PermutationChain {
 public:
  explicit PermutationChain(std::size_t n) : n_(n) {}

  void push(BlockPermutation stage);

  std::size_t size() const noexcept { return n_; }
  const std::vector<BlockPermutation>& stages() const noexcept { return stages_; }

  /// Composite map: the image index of i after all stages.
  std::vector<std::size_t> table() const;

  template <Scalar T>
  std::vector<T> permute(std::span<const T> x) const;

  template <Scalar T>
  DenseMatrix<T> to_dense() const;

 private:
  std::size_t n_;
  std::vector<BlockPermutation> stages_;
};

PermutationChain bit_reversal(std::size_t n);

}  // namespace monarch
