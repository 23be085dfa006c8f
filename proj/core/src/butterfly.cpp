#include "monarch/butterfly.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "monarch/random.hpp"

namespace monarch {
namespace {

void require_power_of_two(std::size_t n) {
  if (n < 2 || !std::has_single_bit(n)) {
    throw Error(ErrorCode::BadSize, "size " + std::to_string(n) + " is not a power of 2 >= 2");
  }
}

// Applies the factors B_lo ... B_hi (B_lo first) of bm to v in place.
template <Scalar T>
void apply_range(const ButterflyMatrix<T>& bm, std::size_t lo, std::size_t hi, std::vector<T>& v) {
  for (std::size_t k = lo; k <= hi; k *= 2) v = bm.factor(k).apply(std::span<const T>(v));
}

}  // namespace

bool is_power_of_two(std::size_t n) noexcept { return std::has_single_bit(n); }

template <Scalar T>
ButterflyFactor<T>::ButterflyFactor(std::size_t n, std::size_t k) : n_(n), k_(k) {
  if (k < 2 || k % 2 != 0 || n % k != 0) {
    throw Error(ErrorCode::BadSize, "butterfly factor size " + std::to_string(k) + " invalid for n=" + std::to_string(n));
  }
  d_[0].assign(n / 2, T(1.0));
  d_[1].assign(n / 2, T{});
  d_[2].assign(n / 2, T{});
  d_[3].assign(n / 2, T(1.0));
}

template <Scalar T>
std::vector<T> ButterflyFactor<T>::apply(std::span<const T> x, OpCounter* counter) const {
  if (x.size() != n_) throw Error(ErrorCode::DimensionMismatch, "butterfly factor: vector length != n");
  const std::size_t h = k_ / 2;
  std::vector<T> y(n_);
  for (std::size_t g = 0; g < n_ / k_; ++g) {
    const std::size_t base = g * k_;
    for (std::size_t t = 0; t < h; ++t) {
      const std::size_t e = g * h + t;
      const T top = x[base + t];
      const T bot = x[base + h + t];
      y[base + t] = d_[0][e] * top + d_[1][e] * bot;
      y[base + h + t] = d_[2][e] * top + d_[3][e] * bot;
    }
  }
  tally(counter, 2 * n_);
  return y;
}

template <Scalar T>
DenseMatrix<T> ButterflyFactor<T>::to_dense() const {
  const std::size_t h = k_ / 2;
  DenseMatrix<T> out(n_, n_);
  for (std::size_t g = 0; g < n_ / k_; ++g)
    for (std::size_t t = 0; t < h; ++t) {
      const std::size_t e = g * h + t;
      const std::size_t r = g * k_ + t;
      out(r, r) = d_[0][e];
      out(r, r + h) = d_[1][e];
      out(r + h, r) = d_[2][e];
      out(r + h, r + h) = d_[3][e];
    }
  return out;
}

template <Scalar T>
ButterflyMatrix<T>::ButterflyMatrix(std::size_t n, std::vector<ButterflyFactor<T>> factors)
    : n_(n), factors_(std::move(factors)) {
  require_power_of_two(n);
  std::size_t k = n;
  for (const auto& f : factors_) {
    if (f.n() != n || f.k() != k) throw Error(ErrorCode::BadSize, "butterfly factors must be B_n, B_(n/2), ..., B_2");
    k /= 2;
  }
  if (k != 1) throw Error(ErrorCode::BadSize, "butterfly needs log2(n) factors");
}

template <Scalar T>
ButterflyMatrix<T> ButterflyMatrix<T>::identity(std::size_t n) {
  require_power_of_two(n);
  std::vector<ButterflyFactor<T>> f;
  for (std::size_t k = n; k >= 2; k /= 2) f.emplace_back(n, k);
  return ButterflyMatrix(n, std::move(f));
}

template <Scalar T>
const ButterflyFactor<T>& ButterflyMatrix<T>::factor(std::size_t k) const {
  if (k < 2 || k > n_ || !std::has_single_bit(k)) throw Error(ErrorCode::IndexOutOfRange, "no butterfly factor of that size");
  return factors_[static_cast<std::size_t>(std::countr_zero(n_) - std::countr_zero(k))];
}

template <Scalar T>
ButterflyFactor<T>& ButterflyMatrix<T>::factor(std::size_t k) {
  return const_cast<ButterflyFactor<T>&>(std::as_const(*this).factor(k));
}

template <Scalar T>
std::vector<T> butterfly_matvec(const ButterflyMatrix<T>& bm, std::span<const T> x, OpCounter* counter) {
  if (x.size() != bm.n()) throw Error(ErrorCode::DimensionMismatch, "butterfly_matvec: vector length != n");
  std::vector<T> v(x.begin(), x.end());
  for (auto it = bm.factors().rbegin(); it != bm.factors().rend(); ++it) v = it->apply(std::span<const T>(v), counter);
  return v;
}

template <Scalar T>
DenseMatrix<T> butterfly_to_dense(const ButterflyMatrix<T>& bm) {
  DenseMatrix<T> acc = DenseMatrix<T>::identity(bm.n());
  for (const auto& f : bm.factors()) acc = matmul(acc, f.to_dense());
  return acc;
}

template <Scalar T>
MonarchMatrix<T> butterfly_to_monarch(const ButterflyMatrix<T>& bm, std::size_t b) {
  const std::size_t n = bm.n();
  if (!std::has_single_bit(b)) throw Error(ErrorCode::BadBlocking, "butterfly block size must be a power of 2");
  require_monarch_blocking(n, b);
  const std::size_t q = n / b;

  // Factors up to B_b act inside aligned blocks of size b, so R_k is the
  // image of the basis vectors of block k.
  BlockDiagMatrix<T> r(b, b, q);
  for (std::size_t k = 0; k < q; ++k)
    for (std::size_t i = 0; i < b; ++i) {
      std::vector<T> v(n);
      v[k * b + i] = T(1.0);
      apply_range(bm, 2, b, v);
      for (std::size_t j = 0; j < b; ++j) r.block(k)(j, i) = v[k * b + j];
    }

  // Factors from B_2b on pair indices that differ by multiples of b, so each
  // residue class mod b is invariant: L is in DB(b, n).
  DiagBlockMatrix<T> l(b, b, q, q);
  for (std::size_t k = 0; k < q; ++k)
    for (std::size_t j = 0; j < b; ++j) {
      std::vector<T> v(n);
      v[k * b + j] = T(1.0);
      apply_range(bm, 2 * b, n, v);
      for (std::size_t row = 0; row < q; ++row) l.diag(row, k)[j] = v[row * b + j];
    }
  return MonarchMatrix<T>(db_to_bd(l), std::move(r));
}

DftButterfly dft_butterfly(std::size_t n) {
  require_power_of_two(n);
  std::vector<ButterflyFactor<cplx>> factors;
  for (std::size_t k = n; k >= 2; k /= 2) {
    ButterflyFactor<cplx> f(n, k);
    const std::size_t h = k / 2;
    for (std::size_t g = 0; g < n / k; ++g)
      for (std::size_t t = 0; t < h; ++t) {
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(k);
        const cplx w = std::polar(1.0, angle);
        f.diag(1)[g * h + t] = w;
        f.diag(2)[g * h + t] = 1.0;
        f.diag(3)[g * h + t] = -w;
      }
    factors.push_back(std::move(f));
  }
  return {ButterflyMatrix<cplx>(n, std::move(factors)), bit_reversal(n)};
}

DenseMatrix<cplx> dft_matrix(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::BadSize, "DFT size must be positive");
  DenseMatrix<cplx> out(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t e = (j * k) % n;
      out(j, k) = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(e) / static_cast<double>(n));
    }
  return out;
}

ButterflyMatrix<double> hadamard_butterfly(std::size_t n) {
  auto bm = ButterflyMatrix<double>::identity(n);
  for (std::size_t k = n; k >= 2; k /= 2) {
    auto& f = bm.factor(k);
    for (double& v : f.diag(1)) v = 1.0;
    for (double& v : f.diag(2)) v = 1.0;
    for (double& v : f.diag(3)) v = -1.0;
  }
  return bm;
}

template <Scalar T>
ButterflyMatrix<T> random_butterfly(std::size_t n, std::uint64_t seed) {
  auto bm = ButterflyMatrix<T>::identity(n);
  Rng rng(seed);
  for (std::size_t k = n; k >= 2; k /= 2)
    for (int q = 0; q < 4; ++q)
      for (T& v : bm.factor(k).diag(q)) v = rng.draw<T>();
  return bm;
}

#define MONARCH_INSTANTIATE_BUTTERFLY(T)                                                          \
  template class ButterflyFactor<T>;                                                              \
  template class ButterflyMatrix<T>;                                                              \
  template std::vector<T> butterfly_matvec(const ButterflyMatrix<T>&, std::span<const T>, OpCounter*); \
  template DenseMatrix<T> butterfly_to_dense(const ButterflyMatrix<T>&);                          \
  template MonarchMatrix<T> butterfly_to_monarch(const ButterflyMatrix<T>&, std::size_t);         \
  template ButterflyMatrix<T> random_butterfly(std::size_t, std::uint64_t);

MONARCH_INSTANTIATE_BUTTERFLY(double)
MONARCH_INSTANTIATE_BUTTERFLY(cplx)

}  // namespace monarch
