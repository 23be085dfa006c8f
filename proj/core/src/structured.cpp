#include "monarch/structured.hpp"

#include <string>

#include "monarch/parallel.hpp"

namespace monarch {
namespace {

void require_divides(std::size_t b, std::size_t n, const char* what) {
  if (b == 0 || n % b != 0) {
    throw Error(ErrorCode::BadBlocking,
                std::string(what) + ": block " + std::to_string(b) + " does not divide " + std::to_string(n));
  }
}

// Whether local (r, c) lies on the wrapped diagonal of a b_row x b_col block.
bool on_wrapped_diag(std::size_t r, std::size_t c, std::size_t b_row, std::size_t b_col) {
  return b_col <= b_row ? r % b_col == c : c % b_row == r;
}

}  // namespace

template <Scalar T>
BlockDiagMatrix<T>::BlockDiagMatrix(std::vector<DenseMatrix<T>> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) return;
  block_rows_ = blocks_.front().rows();
  block_cols_ = blocks_.front().cols();
  for (const auto& blk : blocks_) {
    if (blk.rows() != block_rows_ || blk.cols() != block_cols_) {
      throw Error(ErrorCode::DimensionMismatch, "block-diagonal blocks must share one shape");
    }
  }
}

template <Scalar T>
BlockDiagMatrix<T>::BlockDiagMatrix(std::size_t block_rows, std::size_t block_cols, std::size_t num_blocks)
    : block_rows_(block_rows), block_cols_(block_cols), blocks_(num_blocks, DenseMatrix<T>(block_rows, block_cols)) {}

template <Scalar T>
BlockDiagMatrix<T> BlockDiagMatrix<T>::identity(std::size_t b, std::size_t n) {
  require_divides(b, n, "BD identity");
  return BlockDiagMatrix(std::vector<DenseMatrix<T>>(n / b, DenseMatrix<T>::identity(b)));
}

template <Scalar T>
BlockDiagMatrix<T> BlockDiagMatrix<T>::from_dense(const DenseMatrix<T>& a, std::size_t block_rows,
                                                  std::size_t block_cols) {
  if (!bd_membership(a, block_rows, block_cols)) {
    throw Error(ErrorCode::DimensionMismatch, "matrix has entries outside the diagonal blocks");
  }
  const std::size_t q = a.rows() / block_rows;
  std::vector<DenseMatrix<T>> blocks;
  blocks.reserve(q);
  for (std::size_t k = 0; k < q; ++k) blocks.push_back(a.block(k * block_rows, k * block_cols, block_rows, block_cols));
  return BlockDiagMatrix(std::move(blocks));
}

template <Scalar T>
DenseMatrix<T> BlockDiagMatrix<T>::to_dense() const {
  DenseMatrix<T> out(rows(), cols());
  for (std::size_t k = 0; k < blocks_.size(); ++k) out.set_block(k * block_rows_, k * block_cols_, blocks_[k]);
  return out;
}

template <Scalar T>
DiagBlockMatrix<T>::DiagBlockMatrix(std::size_t b_row, std::size_t b_col, std::size_t grid_rows,
                                    std::size_t grid_cols)
    : b_row_(b_row), b_col_(b_col), grid_rows_(grid_rows), grid_cols_(grid_cols) {
  if (b_row == 0 || b_col == 0) throw Error(ErrorCode::BadBlocking, "DB block sizes must be >= 1");
  entries_.assign(grid_rows * grid_cols * diag_length(), T{});
}

template <Scalar T>
DiagBlockMatrix<T> DiagBlockMatrix<T>::identity(std::size_t b, std::size_t n) {
  require_divides(b, n, "DB identity");
  DiagBlockMatrix out(b, b, n / b, n / b);
  for (std::size_t g = 0; g < n / b; ++g)
    for (T& v : out.diag(g, g)) v = T(1.0);
  return out;
}

template <Scalar T>
DiagBlockMatrix<T> DiagBlockMatrix<T>::from_dense(const DenseMatrix<T>& a, std::size_t b_row, std::size_t b_col) {
  if (!db_membership(a, b_row, b_col)) {
    throw Error(ErrorCode::DimensionMismatch, "matrix has entries off the wrapped diagonals");
  }
  DiagBlockMatrix out(b_row, b_col, a.rows() / b_row, a.cols() / b_col);
  for (std::size_t gi = 0; gi < out.grid_rows_; ++gi)
    for (std::size_t gj = 0; gj < out.grid_cols_; ++gj) {
      auto d = out.diag(gi, gj);
      for (std::size_t t = 0; t < d.size(); ++t) {
        const auto [r, c] = out.position(t);
        d[t] = a(gi * b_row + r, gj * b_col + c);
      }
    }
  return out;
}

template <Scalar T>
std::span<T> DiagBlockMatrix<T>::diag(std::size_t gi, std::size_t gj) {
  if (gi >= grid_rows_ || gj >= grid_cols_) throw Error(ErrorCode::IndexOutOfRange, "DB block index");
  return {entries_.data() + (gi * grid_cols_ + gj) * diag_length(), diag_length()};
}

template <Scalar T>
std::span<const T> DiagBlockMatrix<T>::diag(std::size_t gi, std::size_t gj) const {
  if (gi >= grid_rows_ || gj >= grid_cols_) throw Error(ErrorCode::IndexOutOfRange, "DB block index");
  return {entries_.data() + (gi * grid_cols_ + gj) * diag_length(), diag_length()};
}

template <Scalar T>
std::pair<std::size_t, std::size_t> DiagBlockMatrix<T>::position(std::size_t t) const noexcept {
  if (b_col_ <= b_row_) return {t, t % b_col_};
  return {t % b_row_, t};
}

template <Scalar T>
DenseMatrix<T> DiagBlockMatrix<T>::to_dense() const {
  DenseMatrix<T> out(rows(), cols());
  for (std::size_t gi = 0; gi < grid_rows_; ++gi)
    for (std::size_t gj = 0; gj < grid_cols_; ++gj) {
      auto d = diag(gi, gj);
      for (std::size_t t = 0; t < d.size(); ++t) {
        const auto [r, c] = position(t);
        out(gi * b_row_ + r, gj * b_col_ + c) = d[t];
      }
    }
  return out;
}

template <Scalar T>
bool bd_membership(const DenseMatrix<T>& a, std::size_t b_row, std::size_t b_col) {
  require_divides(b_row, a.rows(), "bd_membership rows");
  require_divides(b_col, a.cols(), "bd_membership cols");
  if (a.rows() / b_row != a.cols() / b_col) {
    throw Error(ErrorCode::BadBlocking, "bd_membership: row and column block counts differ");
  }
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i / b_row != j / b_col && a(i, j) != T{}) return false;
  return true;
}

template <Scalar T>
bool db_membership(const DenseMatrix<T>& a, std::size_t b_row, std::size_t b_col) {
  require_divides(b_row, a.rows(), "db_membership rows");
  require_divides(b_col, a.cols(), "db_membership cols");
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (!on_wrapped_diag(i % b_row, j % b_col, b_row, b_col) && a(i, j) != T{}) return false;
  return true;
}

template <Scalar T>
BlockDiagMatrix<T> db_to_bd(const DiagBlockMatrix<T>& l) {
  if (l.b_row() != l.b_col()) {
    throw Error(ErrorCode::UnsupportedBlocking, "DB to BD conversion needs equal row and column block sizes");
  }
  const std::size_t b = l.b_row();
  BlockDiagMatrix<T> out(l.grid_rows(), l.grid_cols(), b);
  for (std::size_t i1 = 0; i1 < l.grid_rows(); ++i1)
    for (std::size_t j1 = 0; j1 < l.grid_cols(); ++j1) {
      auto d = l.diag(i1, j1);
      for (std::size_t i0 = 0; i0 < b; ++i0) out.block(i0)(i1, j1) = d[i0];
    }
  return out;
}

template <Scalar T>
DiagBlockMatrix<T> bd_to_db(const BlockDiagMatrix<T>& r, std::size_t b) {
  if (r.num_blocks() != b || b == 0) {
    throw Error(ErrorCode::BadBlocking, "bd_to_db: expected " + std::to_string(b) + " blocks, got " +
                                            std::to_string(r.num_blocks()));
  }
  DiagBlockMatrix<T> out(b, b, r.block_rows(), r.block_cols());
  for (std::size_t i1 = 0; i1 < r.block_rows(); ++i1)
    for (std::size_t j1 = 0; j1 < r.block_cols(); ++j1) {
      auto d = out.diag(i1, j1);
      for (std::size_t i0 = 0; i0 < b; ++i0) d[i0] = r.block(i0)(i1, j1);
    }
  return out;
}

template <Scalar T>
std::vector<T> bd_matvec(const BlockDiagMatrix<T>& r, std::span<const T> x, OpCounter* counter, int threads) {
  if (x.size() != r.cols()) throw Error(ErrorCode::DimensionMismatch, "bd_matvec: vector length != columns");
  const std::size_t br = r.block_rows();
  const std::size_t bc = r.block_cols();
  std::vector<T> y(r.rows());
  parallel_for(r.num_blocks(), threads, [&](std::size_t k) {
    const DenseMatrix<T>& blk = r.block(k);
    for (std::size_t i = 0; i < br; ++i) {
      T acc{};
      for (std::size_t j = 0; j < bc; ++j) acc += blk(i, j) * x[k * bc + j];
      y[k * br + i] = acc;
    }
  });
  tally(counter, r.rows() * bc);
  return y;
}

template <Scalar T>
std::vector<T> bd_adjoint_matvec(const BlockDiagMatrix<T>& r, std::span<const T> x, OpCounter* counter) {
  if (x.size() != r.rows()) throw Error(ErrorCode::DimensionMismatch, "bd_adjoint_matvec: vector length != rows");
  const std::size_t br = r.block_rows();
  const std::size_t bc = r.block_cols();
  std::vector<T> y(r.cols());
  for (std::size_t k = 0; k < r.num_blocks(); ++k) {
    const DenseMatrix<T>& blk = r.block(k);
    for (std::size_t j = 0; j < bc; ++j) {
      T acc{};
      for (std::size_t i = 0; i < br; ++i) acc += conj_of(blk(i, j)) * x[k * br + i];
      y[k * bc + j] = acc;
    }
  }
  tally(counter, r.cols() * br);
  return y;
}

template <Scalar T>
BlockDiagMatrix<T> bd_matmul(const BlockDiagMatrix<T>& a, const BlockDiagMatrix<T>& b) {
  if (a.num_blocks() != b.num_blocks() || a.block_cols() != b.block_rows()) {
    throw Error(ErrorCode::DimensionMismatch, "bd_matmul: block structures do not conform");
  }
  std::vector<DenseMatrix<T>> out;
  out.reserve(a.num_blocks());
  for (std::size_t k = 0; k < a.num_blocks(); ++k) out.push_back(matmul(a.block(k), b.block(k)));
  return BlockDiagMatrix<T>(std::move(out));
}

template <Scalar T>
BlockDiagMatrix<T> bd_adjoint(const BlockDiagMatrix<T>& r) {
  std::vector<DenseMatrix<T>> out;
  out.reserve(r.num_blocks());
  for (const auto& blk : r.blocks()) out.push_back(adjoint(blk));
  return BlockDiagMatrix<T>(std::move(out));
}

bool class_containment_check(std::size_t b, std::size_t c, std::size_t n) {
  if (b == 0 || c == 0 || n == 0) return false;
  return c % b == 0 && n % c == 0;
}

template <Scalar T>
std::size_t count_nonzeros(const DenseMatrix<T>& a) {
  std::size_t k = 0;
  for (const T& v : a.data())
    if (v != T{}) ++k;
  return k;
}

#define MONARCH_INSTANTIATE_STRUCTURED(T)                                                                   \
  template class BlockDiagMatrix<T>;                                                                        \
  template class DiagBlockMatrix<T>;                                                                        \
  template bool bd_membership(const DenseMatrix<T>&, std::size_t, std::size_t);                             \
  template bool db_membership(const DenseMatrix<T>&, std::size_t, std::size_t);                             \
  template BlockDiagMatrix<T> db_to_bd(const DiagBlockMatrix<T>&);                                          \
  template DiagBlockMatrix<T> bd_to_db(const BlockDiagMatrix<T>&, std::size_t);                             \
  template std::vector<T> bd_matvec(const BlockDiagMatrix<T>&, std::span<const T>, OpCounter*, int);        \
  template std::vector<T> bd_adjoint_matvec(const BlockDiagMatrix<T>&, std::span<const T>, OpCounter*);     \
  template BlockDiagMatrix<T> bd_matmul(const BlockDiagMatrix<T>&, const BlockDiagMatrix<T>&);              \
  template BlockDiagMatrix<T> bd_adjoint(const BlockDiagMatrix<T>&);                                        \
  template std::size_t count_nonzeros(const DenseMatrix<T>&);

MONARCH_INSTANTIATE_STRUCTURED(double)
MONARCH_INSTANTIATE_STRUCTURED(cplx)

}  // namespace monarch
