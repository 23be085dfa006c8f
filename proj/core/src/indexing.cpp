#include "monarch/indexing.hpp"

#include <bit>
#include <string>

namespace monarch {

BlockForm block_form(std::size_t i, std::size_t b) {
  if (b == 0) throw Error(ErrorCode::BadBlocking, "block size must be >= 1");
  return {i / b, i % b, b};
}

BlockPermutation::BlockPermutation(std::size_t b, std::size_t n) : b_(b), n_(n), table_(n) {
  if (b == 0 || n == 0 || b > n || n % b != 0) {
    throw Error(ErrorCode::BadBlocking, "block permutation needs b | n, got b=" + std::to_string(b) +
                                            " n=" + std::to_string(n));
  }
  const std::size_t q = n / b;
  for (std::size_t i = 0; i < n; ++i) table_[i] = (i % b) * q + i / b;
}

std::size_t BlockPermutation::apply(std::size_t i) const {
  if (i >= n_) {
    throw Error(ErrorCode::IndexOutOfRange, "index " + std::to_string(i) + " outside [0," + std::to_string(n_) + ")");
  }
  return table_[i];
}

template <Scalar T>
std::vector<T> BlockPermutation::permute(std::span<const T> x) const {
  if (x.size() != n_) throw Error(ErrorCode::DimensionMismatch, "permute length");
  std::vector<T> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[table_[i]] = x[i];
  return out;
}

template <Scalar T>
std::vector<T> BlockPermutation::permute_transpose(std::span<const T> x) const {
  if (x.size() != n_) throw Error(ErrorCode::DimensionMismatch, "permute length");
  std::vector<T> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = x[table_[i]];
  return out;
}

template <Scalar T>
DenseMatrix<T> BlockPermutation::to_dense() const {
  DenseMatrix<T> p(n_, n_);
  for (std::size_t i = 0; i < n_; ++i) p(table_[i], i) = T(1.0);
  return p;
}

template <Scalar T>
DenseMatrix<T> permute_rows(const BlockPermutation& p, const DenseMatrix<T>& a) {
  if (a.rows() != p.size()) throw Error(ErrorCode::DimensionMismatch, "permute_rows: row count != n");
  DenseMatrix<T> out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto src = a.row(i);
    std::copy(src.begin(), src.end(), out.row(p.table()[i]).begin());
  }
  return out;
}

template <Scalar T>
DenseMatrix<T> permute_cols(const BlockPermutation& p, const DenseMatrix<T>& a) {
  if (a.cols() != p.size()) throw Error(ErrorCode::DimensionMismatch, "permute_cols: column count != n");
  DenseMatrix<T> out(a.rows(), a.cols());
  const auto t = p.table();
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, t[j]) = a(i, j);
  return out;
}

template <Scalar T>
DenseMatrix<T> conjugate_by(const BlockPermutation& p, const DenseMatrix<T>& a) {
  return permute_cols(p, permute_rows(p, a));
}

void PermutationChain::push(BlockPermutation stage) {
  if (stage.size() == 0 || n_ % stage.size() != 0) {
    throw Error(ErrorCode::BadBlocking, "chain stage size must divide the chain length");
  }
  stages_.push_back(std::move(stage));
}

std::vector<std::size_t> PermutationChain::table() const {
  std::vector<std::size_t> pos(n_);
  for (std::size_t i = 0; i < n_; ++i) pos[i] = i;
  for (const auto& st : stages_) {
    const std::size_t m = st.size();
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t base = pos[i] - pos[i] % m;
      pos[i] = base + st.table()[pos[i] % m];
    }
  }
  return pos;
}

template <Scalar T>
std::vector<T> PermutationChain::permute(std::span<const T> x) const {
  if (x.size() != n_) throw Error(ErrorCode::DimensionMismatch, "chain permute length");
  std::vector<T> cur(x.begin(), x.end());
  std::vector<T> next(n_);
  for (const auto& st : stages_) {
    const std::size_t m = st.size();
    for (std::size_t base = 0; base < n_; base += m)
      for (std::size_t i = 0; i < m; ++i) next[base + st.table()[i]] = cur[base + i];
    cur.swap(next);
  }
  return cur;
}

template <Scalar T>
DenseMatrix<T> PermutationChain::to_dense() const {
  const auto t = table();
  DenseMatrix<T> p(n_, n_);
  for (std::size_t i = 0; i < n_; ++i) p(t[i], i) = T(1.0);
  return p;
}

PermutationChain bit_reversal(std::size_t n) {
  if (n == 0 || !std::has_single_bit(n)) throw Error(ErrorCode::BadSize, "bit reversal needs a power of 2");
  PermutationChain chain(n);
  for (std::size_t m = n; m >= 4; m /= 2) chain.push(BlockPermutation(2, m));
  return chain;
}

#define MONARCH_INSTANTIATE_INDEXING(T)                                                    \
  template std::vector<T> BlockPermutation::permute(std::span<const T>) const;             \
  template std::vector<T> BlockPermutation::permute_transpose(std::span<const T>) const;   \
  template DenseMatrix<T> BlockPermutation::to_dense() const;                              \
  template DenseMatrix<T> permute_rows(const BlockPermutation&, const DenseMatrix<T>&);    \
  template DenseMatrix<T> permute_cols(const BlockPermutation&, const DenseMatrix<T>&);    \
  template DenseMatrix<T> conjugate_by(const BlockPermutation&, const DenseMatrix<T>&);    \
  template std::vector<T> PermutationChain::permute(std::span<const T>) const;             \
  template DenseMatrix<T> PermutationChain::to_dense() const;

MONARCH_INSTANTIATE_INDEXING(double)
MONARCH_INSTANTIATE_INDEXING(cplx)

}  // namespace monarch
