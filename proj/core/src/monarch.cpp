#include "monarch/monarch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "monarch/parallel.hpp"
#include "monarch/random.hpp"

namespace monarch {
namespace {

constexpr int kMaxRejections = 100000;

template <Scalar T>
DenseMatrix<T> draw_r_block(Rng& rng, std::size_t b, bool constrained) {
  DenseMatrix<T> blk(b, b);
  for (T& v : blk.data()) {
    do {
      v = rng.draw<T>();
    } while (constrained && std::abs(v) < kMinREntry);
  }
  return blk;
}

template <Scalar T>
DenseMatrix<T> draw_l_block(Rng& rng, std::size_t q, bool constrained) {
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    DenseMatrix<T> blk = rng.matrix<T>(q, q);
    if (!constrained || condition_1norm(blk) <= kMaxLtildeCondition) return blk;
  }
  throw Error(ErrorCode::NoConvergence, "could not draw a well-conditioned block");
}

template <Scalar T>
double min_abs_entry(const DenseMatrix<T>& a) {
  double m = std::numeric_limits<double>::infinity();
  for (const T& v : a.data()) m = std::min(m, std::abs(v));
  return m;
}

}  // namespace

void require_monarch_blocking(std::size_t n, std::size_t b) {
  if (b <= 1 || b >= n || n % b != 0) {
    throw Error(ErrorCode::BadBlocking,
                "Monarch blocking needs 1 < b < n and b | n, got n=" + std::to_string(n) + " b=" + std::to_string(b));
  }
}

std::size_t default_block_size(std::size_t n) {
  const auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  if (r * r != n) {
    throw Error(ErrorCode::BadBlocking, "n=" + std::to_string(n) + " is not a perfect square; pass a block size");
  }
  require_monarch_blocking(n, r);
  return r;
}

std::uint64_t monarch_param_count(std::size_t n, std::size_t b) {
  require_monarch_blocking(n, b);
  return static_cast<std::uint64_t>(n) * n / b + static_cast<std::uint64_t>(n) * b;
}

std::uint64_t monarch_flop_count(std::size_t n, std::size_t b) {
  require_monarch_blocking(n, b);
  // R stage: n rows of b products. Ltilde stage: n rows of n/b products.
  return static_cast<std::uint64_t>(n) * b + static_cast<std::uint64_t>(n) * (n / b);
}

template <Scalar T>
MonarchMatrix<T>::MonarchMatrix(BlockDiagMatrix<T> ltilde, BlockDiagMatrix<T> r)
    : ltilde_(std::move(ltilde)), r_(std::move(r)) {
  const std::size_t b = r_.block_rows();
  const std::size_t q = r_.num_blocks();
  if (r_.block_cols() != b) throw Error(ErrorCode::BadBlocking, "R blocks must be square");
  require_monarch_blocking(b * q, b);
  if (ltilde_.num_blocks() != b || ltilde_.block_rows() != q || ltilde_.block_cols() != q) {
    throw Error(ErrorCode::BadBlocking, "Ltilde must hold b blocks of size (n/b) x (n/b)");
  }
}

template <Scalar T>
MonarchMatrix<T> MonarchMatrix<T>::identity(std::size_t n, std::size_t b) {
  require_monarch_blocking(n, b);
  return MonarchMatrix(BlockDiagMatrix<T>::identity(n / b, n), BlockDiagMatrix<T>::identity(b, n));
}

template <Scalar T>
std::vector<T> monarch_matvec(const MonarchMatrix<T>& m, std::span<const T> x, OpCounter* counter, int threads) {
  if (x.size() != m.n()) throw Error(ErrorCode::DimensionMismatch, "monarch_matvec: vector length != n");
  const BlockPermutation p(m.b(), m.n());
  const std::vector<T> y = bd_matvec(m.r(), x, counter, threads);
  const std::vector<T> yp = p.permute(std::span<const T>(y));
  const std::vector<T> z = bd_matvec(m.ltilde(), std::span<const T>(yp), counter, threads);
  return p.permute_transpose(std::span<const T>(z));
}

template <Scalar T>
std::vector<T> monarch_adjoint_matvec(const MonarchMatrix<T>& m, std::span<const T> x, OpCounter* counter) {
  if (x.size() != m.n()) throw Error(ErrorCode::DimensionMismatch, "monarch_adjoint_matvec: vector length != n");
  const BlockPermutation p(m.b(), m.n());
  const std::vector<T> xp = p.permute(x);
  const std::vector<T> z = bd_adjoint_matvec(m.ltilde(), std::span<const T>(xp), counter);
  const std::vector<T> y = p.permute_transpose(std::span<const T>(z));
  return bd_adjoint_matvec(m.r(), std::span<const T>(y), counter);
}

template <Scalar T>
DenseMatrix<T> monarch_matmat(const MonarchMatrix<T>& m, const DenseMatrix<T>& x, int threads) {
  if (x.rows() != m.n()) throw Error(ErrorCode::DimensionMismatch, "monarch_matmat: row count != n");
  DenseMatrix<T> out(x.rows(), x.cols());
  parallel_for(x.cols(), threads, [&](std::size_t c) {
    const std::vector<T> col = x.column(c);
    const std::vector<T> y = monarch_matvec(m, std::span<const T>(col));
    for (std::size_t i = 0; i < y.size(); ++i) out(i, c) = y[i];
  });
  return out;
}

template <Scalar T>
DenseMatrix<T> monarch_to_dense(const MonarchMatrix<T>& m) {
  const std::size_t n = m.n();
  const std::size_t b = m.b();
  const std::size_t q = m.q();
  DenseMatrix<T> out(n, n);
  for (std::size_t l = 0; l < q; ++l)
    for (std::size_t j = 0; j < b; ++j)
      for (std::size_t k = 0; k < q; ++k) {
        const T lv = m.ltilde().block(j)(l, k);
        const DenseMatrix<T>& rk = m.r().block(k);
        for (std::size_t i = 0; i < b; ++i) out(l * b + j, k * b + i) = lv * rk(j, i);
      }
  return out;
}

template <Scalar T>
MonarchProduct<T>::MonarchProduct(ProductKind kind, std::vector<ProductFactor<T>> factors, std::size_t n)
    : kind_(kind), factors_(std::move(factors)), n_(n) {
  if (factors_.empty()) throw Error(ErrorCode::DimensionMismatch, "product needs at least one factor");
  const std::size_t big = factors_.front().matrix.n();
  for (const auto& f : factors_) {
    if (f.matrix.n() != big) throw Error(ErrorCode::DimensionMismatch, "product factors differ in size");
    if (kind_ == ProductKind::Hierarchy && f.matrix.b() != factors_.front().matrix.b()) {
      throw Error(ErrorCode::BadBlocking, "hierarchy factors must share one block size");
    }
  }
  if (n_ == 0 || big % n_ != 0) {
    throw Error(ErrorCode::DimensionMismatch, "factor size must be a multiple of the product size");
  }
}

template <Scalar T>
MonarchProduct<T> MonarchProduct<T>::mm_star(MonarchMatrix<T> m1, MonarchMatrix<T> m2) {
  const std::size_t n = m1.n();
  std::vector<ProductFactor<T>> f{{std::move(m1), false}, {std::move(m2), true}};
  return MonarchProduct(ProductKind::MmStar, std::move(f), n);
}

template <Scalar T>
MonarchProduct<T> MonarchProduct<T>::mstar_m(MonarchMatrix<T> m1, MonarchMatrix<T> m2) {
  const std::size_t n = m1.n();
  std::vector<ProductFactor<T>> f{{std::move(m1), true}, {std::move(m2), false}};
  return MonarchProduct(ProductKind::MstarM, std::move(f), n);
}

template <Scalar T>
MonarchProduct<T> MonarchProduct<T>::hierarchy(std::vector<std::pair<MonarchMatrix<T>, MonarchMatrix<T>>> pairs,
                                               std::size_t n) {
  std::vector<ProductFactor<T>> f;
  for (auto& [a, c] : pairs) {
    f.push_back({std::move(a), false});
    f.push_back({std::move(c), true});
  }
  return MonarchProduct(ProductKind::Hierarchy, std::move(f), n);
}

template <Scalar T>
std::size_t MonarchProduct<T>::width() const noexcept {
  return kind_ == ProductKind::Hierarchy ? (factors_.size() + 1) / 2 : 1;
}

template <Scalar T>
std::vector<T> product_matvec(const MonarchProduct<T>& p, std::span<const T> x, OpCounter* counter) {
  if (x.size() != p.n()) throw Error(ErrorCode::DimensionMismatch, "product_matvec: vector length != n");
  std::vector<T> v(p.inner_size());
  std::copy(x.begin(), x.end(), v.begin());
  for (auto it = p.factors().rbegin(); it != p.factors().rend(); ++it) {
    v = it->adjoint ? monarch_adjoint_matvec(it->matrix, std::span<const T>(v), counter)
                    : monarch_matvec(it->matrix, std::span<const T>(v), counter);
  }
  v.resize(p.n());
  return v;
}

template <Scalar T>
DenseMatrix<T> product_to_dense(const MonarchProduct<T>& p) {
  DenseMatrix<T> acc = DenseMatrix<T>::identity(p.inner_size());
  for (const auto& f : p.factors()) {
    const DenseMatrix<T> d = monarch_to_dense(f.matrix);
    acc = matmul(acc, f.adjoint ? adjoint(d) : d);
  }
  return acc.block(0, 0, p.n(), p.n());
}

template <Scalar T>
std::pair<MonarchMatrix<T>, MonarchMatrix<T>> mm_star_to_mstar_m(const MonarchMatrix<T>& m1,
                                                                const MonarchMatrix<T>& m2) {
  if (m1.n() != m2.n() || m1.b() != m2.b()) {
    throw Error(ErrorCode::DimensionMismatch, "MM* factors must share n and b");
  }
  const std::size_t n = m1.n();
  const std::size_t b = m1.b();
  BlockDiagMatrix<T> middle = bd_matmul(m2.r(), bd_adjoint(m1.r()));
  MonarchMatrix<T> n1(std::move(middle), bd_adjoint(m1.ltilde()));
  MonarchMatrix<T> n2(BlockDiagMatrix<T>::identity(b, n), bd_adjoint(m2.ltilde()));
  return {std::move(n1), std::move(n2)};
}

template <Scalar T>
MonarchMatrix<T> random_monarch(std::size_t n, std::size_t b, std::uint64_t seed, MonarchConstraint constraint) {
  require_monarch_blocking(n, b);
  const bool constrained = constraint == MonarchConstraint::Assumption1;
  const std::size_t q = n / b;
  Rng rng(seed);
  std::vector<DenseMatrix<T>> r;
  std::vector<DenseMatrix<T>> l;
  for (std::size_t k = 0; k < q; ++k) r.push_back(draw_r_block<T>(rng, b, constrained));
  for (std::size_t j = 0; j < b; ++j) l.push_back(draw_l_block<T>(rng, q, constrained));
  return MonarchMatrix<T>(BlockDiagMatrix<T>(std::move(l)), BlockDiagMatrix<T>(std::move(r)));
}

template <Scalar T>
MonarchProduct<T> random_mm_star(std::size_t n, std::size_t b, std::uint64_t seed) {
  require_monarch_blocking(n, b);
  const std::size_t q = n / b;
  Rng rng(seed);
  std::vector<DenseMatrix<T>> l1, l2, r1, r2;
  for (std::size_t j = 0; j < b; ++j) l1.push_back(draw_l_block<T>(rng, q, true));
  for (std::size_t j = 0; j < b; ++j) l2.push_back(draw_l_block<T>(rng, q, true));
  // Blocks of R1 R2^* are independent across k, so reject per block.
  for (std::size_t k = 0; k < q; ++k) {
    int attempt = 0;
    for (;; ++attempt) {
      if (attempt == kMaxRejections) throw Error(ErrorCode::NoConvergence, "could not draw an MM* middle block");
      DenseMatrix<T> a = draw_r_block<T>(rng, b, true);
      DenseMatrix<T> c = draw_r_block<T>(rng, b, true);
      if (min_abs_entry(matmul(a, adjoint(c))) >= kMinREntry) {
        r1.push_back(std::move(a));
        r2.push_back(std::move(c));
        break;
      }
    }
  }
  MonarchMatrix<T> m1(BlockDiagMatrix<T>(std::move(l1)), BlockDiagMatrix<T>(std::move(r1)));
  MonarchMatrix<T> m2(BlockDiagMatrix<T>(std::move(l2)), BlockDiagMatrix<T>(std::move(r2)));
  return MonarchProduct<T>::mm_star(std::move(m1), std::move(m2));
}

#define MONARCH_INSTANTIATE_CORE(T)                                                                      \
  template class MonarchMatrix<T>;                                                                       \
  template class MonarchProduct<T>;                                                                      \
  template std::vector<T> monarch_matvec(const MonarchMatrix<T>&, std::span<const T>, OpCounter*, int);  \
  template std::vector<T> monarch_adjoint_matvec(const MonarchMatrix<T>&, std::span<const T>, OpCounter*); \
  template DenseMatrix<T> monarch_matmat(const MonarchMatrix<T>&, const DenseMatrix<T>&, int);           \
  template DenseMatrix<T> monarch_to_dense(const MonarchMatrix<T>&);                                     \
  template std::vector<T> product_matvec(const MonarchProduct<T>&, std::span<const T>, OpCounter*);      \
  template DenseMatrix<T> product_to_dense(const MonarchProduct<T>&);                                    \
  template std::pair<MonarchMatrix<T>, MonarchMatrix<T>> mm_star_to_mstar_m(const MonarchMatrix<T>&,     \
                                                                            const MonarchMatrix<T>&);    \
  template MonarchMatrix<T> random_monarch(std::size_t, std::size_t, std::uint64_t, MonarchConstraint);  \
  template MonarchProduct<T> random_mm_star(std::size_t, std::size_t, std::uint64_t);

MONARCH_INSTANTIATE_CORE(double)
MONARCH_INSTANTIATE_CORE(cplx)

}  // namespace monarch
