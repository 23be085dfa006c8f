#include "monarch/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "monarch/parallel.hpp"
#include "monarch/random.hpp"

namespace monarch {
namespace {

double offdiag_norm(const DenseMatrix<cplx>& a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) acc += std::norm(a(i, j));
  return std::sqrt(acc);
}

double family_residual(const DenseMatrix<cplx>& q, const DenseMatrix<cplx>& qinv,
                       const std::vector<DenseMatrix<cplx>>& family, OpCounter* counter) {
  double worst = 0.0;
  for (const auto& g : family) {
    const double gn = frobenius_norm(g);
    if (gn == 0.0) continue;
    worst = std::max(worst, offdiag_norm(matmul(matmul(q, g, counter), qinv, counter)) / gn);
  }
  return worst;
}

// Groups indices whose values lie within tol of each other (single linkage).
std::vector<std::vector<std::size_t>> cluster(const std::vector<cplx>& lambda) {
  double scale = 0.0;
  for (const cplx& l : lambda) scale = std::max(scale, std::abs(l));
  const double tol = kClusterTol * (scale > 0.0 ? scale : 1.0);
  const std::size_t n = lambda.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(lambda[i] - lambda[j]) <= tol) parent[find(i)] = find(j);
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> slot(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (slot[r] == n) {
      slot[r] = groups.size();
      groups.emplace_back();
    }
    groups[slot[r]].push_back(i);
  }
  return groups;
}

bool simple_spectrum(const std::vector<cplx>& lambda) {
  for (const auto& g : cluster(lambda))
    if (g.size() > 1) return false;
  return true;
}

SimDiagResult staged(const std::vector<DenseMatrix<cplx>>& family, OpCounter* counter) {
  const std::size_t n = family.front().rows();
  DenseMatrix<cplx> q = DenseMatrix<cplx>::identity(n);
  std::vector<std::vector<std::size_t>> clusters(1);
  clusters[0].resize(n);
  std::iota(clusters[0].begin(), clusters[0].end(), std::size_t{0});

  for (const auto& g : family) {
    bool any_open = false;
    for (const auto& c : clusters) any_open = any_open || c.size() > 1;
    if (!any_open) break;
    const DenseMatrix<cplx> h = matmul(matmul(q, g, counter), lu_invert(q, counter), counter);
    std::vector<std::vector<std::size_t>> next;
    for (const auto& c : clusters) {
      if (c.size() == 1) {
        next.push_back(c);
        continue;
      }
      const std::size_t s = c.size();
      DenseMatrix<cplx> sub(s, s);
      for (std::size_t a = 0; a < s; ++a)
        for (std::size_t bb = 0; bb < s; ++bb) sub(a, bb) = h(c[a], c[bb]);
      const EigResult e = eig(sub, counter);
      // Rows of Q in this cluster become Y^-1 times themselves.
      const DenseMatrix<cplx> yinv = lu_invert(e.q, counter);
      DenseMatrix<cplx> rows(s, n);
      for (std::size_t a = 0; a < s; ++a)
        for (std::size_t col = 0; col < n; ++col) rows(a, col) = q(c[a], col);
      const DenseMatrix<cplx> updated = matmul(yinv, rows, counter);
      for (std::size_t a = 0; a < s; ++a)
        for (std::size_t col = 0; col < n; ++col) q(c[a], col) = updated(a, col);
      for (const auto& grp : cluster(e.lambda)) {
        std::vector<std::size_t> split;
        for (std::size_t t : grp) split.push_back(c[t]);
        next.push_back(std::move(split));
      }
    }
    clusters = std::move(next);
  }
  SimDiagResult out;
  out.q = std::move(q);
  return out;
}

template <Scalar T>
std::vector<DenseMatrix<cplx>> grid_blocks(const DenseMatrix<T>& m, std::size_t b) {
  if (!m.is_square()) throw Error(ErrorCode::DimensionMismatch, "MM* factorization needs a square matrix");
  require_monarch_blocking(m.rows(), b);
  const std::size_t q = m.rows() / b;
  const DenseMatrix<cplx> mt = conjugate_by(BlockPermutation(b, m.rows()), to_complex(m));
  std::vector<DenseMatrix<cplx>> blocks;
  blocks.reserve(b * b);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < b; ++j) blocks.push_back(mt.block(i * q, j * q, q, q));
  return blocks;
}

}  // namespace

SimDiagResult simultaneous_diagonalize(const std::vector<DenseMatrix<cplx>>& family, std::uint64_t seed,
                                       OpCounter* counter) {
  if (family.empty()) throw Error(ErrorCode::DimensionMismatch, "empty family");
  const std::size_t n = family.front().rows();
  for (const auto& g : family) {
    if (!g.is_square() || g.rows() != n) throw Error(ErrorCode::DimensionMismatch, "family members must share one square shape");
  }

  // One random combination usually has a simple spectrum, which pins Q down
  // without the staged refinement.
  Rng rng(seed);
  DenseMatrix<cplx> comb(n, n);
  for (const auto& g : family) {
    const double gn = frobenius_norm(g);
    if (gn == 0.0) continue;
    const cplx c = rng.normal() / gn;
    for (std::size_t k = 0; k < comb.size(); ++k) comb.data()[k] += c * g.data()[k];
  }
  try {
    const EigResult e = eig(comb, counter);
    if (simple_spectrum(e.lambda)) {
      SimDiagResult out;
      out.q = lu_invert(e.q, counter);
      out.diag_residual = family_residual(out.q, e.q, family, counter);
      out.fast_path = true;
      if (out.diag_residual <= kSimdiagTol) return out;
    }
  } catch (const Error& err) {
    if (err.code() != ErrorCode::Defective && err.code() != ErrorCode::NoConvergence) throw;
  }

  SimDiagResult out = staged(family, counter);
  out.diag_residual = family_residual(out.q, lu_invert(out.q, counter), family, counter);
  if (!(out.diag_residual <= kSimdiagTol)) {
    throw Error(ErrorCode::SimdiagFailed, "simultaneous diagonalization residual " + std::to_string(out.diag_residual) +
                                              " exceeds " + std::to_string(kSimdiagTol));
  }
  return out;
}

template <Scalar T>
MMStarFactorization factorize_mm_star(const DenseMatrix<T>& m, std::size_t b, int threads, OpCounter* counter,
                                      std::uint64_t seed) {
  const std::vector<DenseMatrix<cplx>> blk = grid_blocks(m, b);
  const std::size_t n = m.rows();
  const std::size_t q = n / b;
  auto at = [&](std::size_t i, std::size_t j) -> const DenseMatrix<cplx>& { return blk[i * b + j]; };

  // Assumption 1: every block invertible.
  std::vector<DenseMatrix<cplx>> inv(b * b);
  parallel_for(b * b, threads, [&](std::size_t idx) {
    try {
      inv[idx] = lu_invert(blk[idx], counter);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Singular) throw;
      throw Error(ErrorCode::SingularBlock, "block (" + std::to_string(idx / b) + "," + std::to_string(idx % b) +
                                                ") of the permuted matrix is singular; Assumption 1 does not hold");
    }
  });
  auto inv_at = [&](std::size_t i, std::size_t j) -> const DenseMatrix<cplx>& { return inv[i * b + j]; };

  // F(i, j) = M_i0^-1 M_ij M_0j^-1 M_00; rows or columns 0 give the identity.
  const std::size_t fam = (b - 1) * (b - 1);
  std::vector<DenseMatrix<cplx>> family(fam);
  parallel_for(fam, threads, [&](std::size_t idx) {
    const std::size_t i = idx / (b - 1) + 1;
    const std::size_t j = idx % (b - 1) + 1;
    family[idx] = matmul(matmul(matmul(inv_at(i, 0), at(i, j), counter), inv_at(0, j), counter), at(0, 0), counter);
  });

  const SimDiagResult sd = simultaneous_diagonalize(family, seed, counter);
  const DenseMatrix<cplx> c0inv = lu_invert(sd.q, counter);

  std::vector<DenseMatrix<cplx>> a(b), c(b), ainv(b), cinv(b);
  parallel_for(b, threads, [&](std::size_t i) {
    a[i] = matmul(at(i, 0), c0inv, counter);
    ainv[i] = lu_invert(a[i], counter);
  });
  c[0] = sd.q;
  cinv[0] = c0inv;
  parallel_for(b - 1, threads, [&](std::size_t jj) {
    const std::size_t j = jj + 1;
    c[j] = matmul(ainv[0], at(0, j), counter);
    cinv[j] = lu_invert(c[j], counter);
  });

  MMStarFactorization out;
  out.n = n;
  out.b = b;
  out.r = DiagBlockMatrix<cplx>(q, q, b, b);
  std::vector<double> ratios(b * b);
  parallel_for(b * b, threads, [&](std::size_t idx) {
    const std::size_t i = idx / b;
    const std::size_t j = idx % b;
    const DenseMatrix<cplx> d = matmul(matmul(ainv[i], at(i, j), counter), cinv[j], counter);
    const double dn = frobenius_norm(d);
    ratios[idx] = dn > 0.0 ? offdiag_norm(d) / dn : 0.0;
    auto diag = out.r.diag(i, j);
    for (std::size_t t = 0; t < q; ++t) diag[t] = d(t, t);
  });
  out.max_offdiag_ratio = *std::max_element(ratios.begin(), ratios.end());
  out.l1 = BlockDiagMatrix<cplx>(std::move(a));
  out.l2 = BlockDiagMatrix<cplx>(std::move(c));
  out.simdiag_residual = sd.diag_residual;
  out.fast_path = sd.fast_path;
  return out;
}

std::pair<MonarchMatrix<cplx>, MonarchMatrix<cplx>> factorization_to_monarch(const MMStarFactorization& f) {
  // P^T L1 P R is a Monarch matrix with Ltilde = L1; P^T L2 P is one with R = I.
  MonarchMatrix<cplx> left(f.l1, db_to_bd(f.r));
  MonarchMatrix<cplx> right(f.l2, BlockDiagMatrix<cplx>::identity(f.b, f.n));
  return {std::move(left), std::move(right)};
}

DenseMatrix<cplx> reconstruct(const MMStarFactorization& f) {
  const BlockPermutation pinv = BlockPermutation(f.b, f.n).inverse();
  const DenseMatrix<cplx> l1 = conjugate_by(pinv, f.l1.to_dense());
  const DenseMatrix<cplx> l2 = conjugate_by(pinv, f.l2.to_dense());
  const DenseMatrix<cplx> r = conjugate_by(pinv, f.r.to_dense());
  return matmul(matmul(l1, r), l2);
}

template <Scalar T>
Assumption1Report assumption1_check(const DenseMatrix<T>& m, std::size_t b) {
  const std::vector<DenseMatrix<cplx>> blk = grid_blocks(m, b);
  Assumption1Report rep;
  for (std::size_t idx = 0; idx < blk.size(); ++idx) {
    const double c = condition_1norm(blk[idx]);
    if (idx == 0 || !(c <= rep.worst_condition)) {
      rep.worst_condition = c;
      rep.worst_i = idx / b;
      rep.worst_j = idx % b;
    }
  }
  rep.pass = rep.worst_condition <= kAssumption1MaxCondition;
  return rep;
}

template MMStarFactorization factorize_mm_star(const DenseMatrix<double>&, std::size_t, int, OpCounter*, std::uint64_t);
template MMStarFactorization factorize_mm_star(const DenseMatrix<cplx>&, std::size_t, int, OpCounter*, std::uint64_t);
template Assumption1Report assumption1_check(const DenseMatrix<double>&, std::size_t);
template Assumption1Report assumption1_check(const DenseMatrix<cplx>&, std::size_t);

}  // namespace monarch
