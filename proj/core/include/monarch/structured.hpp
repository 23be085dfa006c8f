#pragma once

// Block-diagonal (BD) and diagonal-block (DB) matrix classes, their
// membership predicates, and the permutation conversion between them.

#include <cstddef>
#include <span>
#include <vector>

#include "monarch/indexing.hpp"
#include "monarch/numerics.hpp"

namespace monarch {

/// diag(B_0, ..., B_{q-1}) with every B_k of shape block_rows x block_cols.
template <Scalar T>
class BlockDiagMatrix {
 public:
  BlockDiagMatrix() = default;
  /// Throws DimensionMismatch if the blocks do not share one shape.
  explicit BlockDiagMatrix(std::vector<DenseMatrix<T>> blocks);
  BlockDiagMatrix(std::size_t block_rows, std::size_t block_cols, std::size_t num_blocks);

  /// BD(b, n) identity; BadBlocking unless b | n.
  static BlockDiagMatrix identity(std::size_t b, std::size_t n);
  /// Copies the diagonal blocks of a; throws DimensionMismatch when a has
  /// nonzeros outside them.
  static BlockDiagMatrix from_dense(const DenseMatrix<T>& a, std::size_t block_rows, std::size_t block_cols);

  std::size_t block_rows() const noexcept { return block_rows_; }
  std::size_t block_cols() const noexcept { return block_cols_; }
  std::size_t num_blocks() const noexcept { return blocks_.size(); }
  std::size_t rows() const noexcept { return block_rows_ * blocks_.size(); }
  std::size_t cols() const noexcept { return block_cols_ * blocks_.size(); }

  const DenseMatrix<T>& block(std::size_t k) const { return blocks_.at(k); }
  DenseMatrix<T>& block(std::size_t k) { return blocks_.at(k); }
  const std::vector<DenseMatrix<T>>& blocks() const noexcept { return blocks_; }

  /// Entries inside the block support: q * block_rows * block_cols.
  std::size_t support_size() const noexcept { return blocks_.size() * block_rows_ * block_cols_; }

  DenseMatrix<T> to_dense() const;

  friend bool operator==(const BlockDiagMatrix&, const BlockDiagMatrix&) = default;

 private:
  std::size_t block_rows_ = 0;
  std::size_t block_cols_ = 0;
  std::vector<DenseMatrix<T>> blocks_;
};

/// Grid of grid_rows x grid_cols blocks, each b_row x b_col and wrapped
/// diagonal. Block (I, J) stores max(b_row, b_col) entries; entry t sits at
/// (t, t mod b_col) when b_col <= b_row and at (t mod b_row, t) otherwise.
/// With b_row == b_col == b this is the class DB(b, n).
template <Scalar T>
class DiagBlockMatrix {
 public:
  DiagBlockMatrix() = default;
  DiagBlockMatrix(std::size_t b_row, std::size_t b_col, std::size_t grid_rows, std::size_t grid_cols);

  static DiagBlockMatrix identity(std::size_t b, std::size_t n);
  /// Throws DimensionMismatch when a has nonzeros off the wrapped diagonals.
  static DiagBlockMatrix from_dense(const DenseMatrix<T>& a, std::size_t b_row, std::size_t b_col);

  std::size_t b_row() const noexcept { return b_row_; }
  std::size_t b_col() const noexcept { return b_col_; }
  std::size_t grid_rows() const noexcept { return grid_rows_; }
  std::size_t grid_cols() const noexcept { return grid_cols_; }
  std::size_t rows() const noexcept { return b_row_ * grid_rows_; }
  std::size_t cols() const noexcept { return b_col_ * grid_cols_; }
  std::size_t diag_length() const noexcept { return b_row_ > b_col_ ? b_row_ : b_col_; }
  std::size_t support_size() const noexcept { return grid_rows_ * grid_cols_ * diag_length(); }

  std::span<T> diag(std::size_t gi, std::size_t gj);
  std::span<const T> diag(std::size_t gi, std::size_t gj) const;

  /// Local (row, col) of stored entry t inside a block.
  std::pair<std::size_t, std::size_t> position(std::size_t t) const noexcept;

  DenseMatrix<T> to_dense() const;

  friend bool operator==(const DiagBlockMatrix&, const DiagBlockMatrix&) = default;

 private:
  std::size_t b_row_ = 0;
  std::size_t b_col_ = 0;
  std::size_t grid_rows_ = 0;
  std::size_t grid_cols_ = 0;
  std::vector<T> entries_;
};

/// True iff every entry outside the diagonal blocks is exactly zero.
/// BadBlocking when the shape does not split into equally many row and
/// column blocks.
template <Scalar T>
bool bd_membership(const DenseMatrix<T>& a, std::size_t b_row, std::size_t b_col);

/// True iff every entry off the wrapped-diagonal support is exactly zero.
template <Scalar T>
bool db_membership(const DenseMatrix<T>& a, std::size_t b_row, std::size_t b_col);

/// R' = P_(b,n3) L P_(b,n2)^T as a BD matrix with b blocks of
/// grid_rows x grid_cols. UnsupportedBlocking unless b_row == b_col.
template <Scalar T>
BlockDiagMatrix<T> db_to_bd(const DiagBlockMatrix<T>& l);

/// Exact inverse of db_to_bd; r must have b blocks.
template <Scalar T>
DiagBlockMatrix<T> bd_to_db(const BlockDiagMatrix<T>& r, std::size_t b);

/// Per-block products. counter receives rows * block_cols multiplies.
template <Scalar T>
std::vector<T> bd_matvec(const BlockDiagMatrix<T>& r, std::span<const T> x, OpCounter* counter = nullptr,
                         int threads = 1);

/// Applies r^* (the per-block adjoint) to x.
template <Scalar T>
std::vector<T> bd_adjoint_matvec(const BlockDiagMatrix<T>& r, std::span<const T> x, OpCounter* counter = nullptr);

/// Blockwise product; both operands need the same block count.
template <Scalar T>
BlockDiagMatrix<T> bd_matmul(const BlockDiagMatrix<T>& a, const BlockDiagMatrix<T>& b);

template <Scalar T>
BlockDiagMatrix<T> bd_adjoint(const BlockDiagMatrix<T>& r);

/// BD(b,n) is contained in BD(c,n) when b | c and c | n.
bool class_containment_check(std::size_t b, std::size_t c, std::size_t n);

template <Scalar T>
std::size_t count_nonzeros(const DenseMatrix<T>& a);

}  // namespace monarch
