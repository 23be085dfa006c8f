#pragma once

// Recovery of Monarch factors from a matrix in MM*(b, n):
// P M P^T = diag(A_i) [D_ij] diag(C_j) with every D_ij diagonal.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "monarch/monarch.hpp"

namespace monarch {

/// Two eigenvalues share a cluster when |l_i - l_j| <= kClusterTol * max|l|.
inline constexpr double kClusterTol = 1e-6;
/// Accept Q when every off-diagonal mass of Q G Q^-1 is <= this times |G|_F.
inline constexpr double kSimdiagTol = 1e-7;
/// Assumption 1 holds when every block condition number is <= this.
inline constexpr double kAssumption1MaxCondition = 1e10;

struct SimDiagResult {
  /// Q G Q^-1 is diagonal for every family member.
  DenseMatrix<cplx> q;
  /// max over the family of offdiag(Q G Q^-1)_F / |G|_F.
  double diag_residual = 0.0;
  /// True when one random combination had a simple spectrum.
  bool fast_path = false;
};

/// Throws SimdiagFailed when the residual exceeds kSimdiagTol and Defective
/// or NoConvergence from the eigensolver.
SimDiagResult simultaneous_diagonalize(const std::vector<DenseMatrix<cplx>>& family, std::uint64_t seed = 1,
                                       OpCounter* counter = nullptr);

struct MMStarFactorization {
  std::size_t n = 0;
  std::size_t b = 0;
  /// Blocks A_i (b blocks of n/b x n/b).
  BlockDiagMatrix<cplx> l1;
  /// Blocks C_j.
  BlockDiagMatrix<cplx> l2;
  /// b x b grid of diagonal (n/b x n/b) blocks D_ij. The middle factor in
  /// BD(b, n) is db_to_bd(r).
  DiagBlockMatrix<cplx> r;
  /// max over (i, j) of offdiag(D_ij)_F / |D_ij|_F before truncation.
  double max_offdiag_ratio = 0.0;
  double simdiag_residual = 0.0;
  bool fast_path = false;
};

/// Throws BadBlocking, SingularBlock (some block of P m P^T is not
/// invertible), SimdiagFailed.
template <Scalar T>
MMStarFactorization factorize_mm_star(const DenseMatrix<T>& m, std::size_t b, int threads = 1,
                                      OpCounter* counter = nullptr, std::uint64_t seed = 1);

/// (P^T L1 P) R (P^T L2 P).
DenseMatrix<cplx> reconstruct(const MMStarFactorization& f);

/// The two Monarch factors (P^T L1 P R, P^T L2 P) whose product is the
/// reconstruction.
std::pair<MonarchMatrix<cplx>, MonarchMatrix<cplx>> factorization_to_monarch(const MMStarFactorization& f);

struct Assumption1Report {
  /// Largest 1-norm condition number over all blocks of P m P^T
  /// (+inf when a block is singular).
  double worst_condition = 0.0;
  std::size_t worst_i = 0;
  std::size_t worst_j = 0;
  bool pass = false;
};

template <Scalar T>
Assumption1Report assumption1_check(const DenseMatrix<T>& m, std::size_t b);

}  // namespace monarch
