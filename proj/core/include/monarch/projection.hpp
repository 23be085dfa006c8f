#pragma once

// Frobenius-optimal projection of a dense square matrix onto M(b, n): each
// (n/b) x b slice of the 4D reshape is replaced by its best rank-1
// approximation.

#include <cstddef>
#include <vector>

#include "monarch/monarch.hpp"

namespace monarch {

struct ProjectionReport {
  double input_norm = 0.0;
  double residual = 0.0;
  /// Indexed j * (n/b) + k for slice (j, k).
  std::vector<double> per_slice_residuals;
  std::size_t block_size = 0;

  double relative_residual() const noexcept { return input_norm > 0.0 ? residual / input_norm : 0.0; }
  double max_slice_residual() const noexcept;
};

template <Scalar T>
struct ProjectionResult {
  MonarchMatrix<T> monarch;
  ProjectionReport report;
};

/// Slice (j, k): the (n/b) x b matrix with entry (l, i) = a[l*b + j, k*b + i].
/// IndexOutOfRange for j >= b or k >= n/b.
template <Scalar T>
DenseMatrix<T> slice_view(const DenseMatrix<T>& a, std::size_t b, std::size_t j, std::size_t k);

/// Throws DimensionMismatch for non-square input, BadBlocking for an invalid
/// b, NoConvergence from the SVD. SVD work is tallied into counter.
template <Scalar T>
ProjectionResult<T> project(const DenseMatrix<T>& a, std::size_t b, OpCounter* counter = nullptr, int threads = 1);

/// Largest sigma_2 / sigma_1 over all slices (0 for zero slices). Members of
/// M(b, n) give values at rounding level.
template <Scalar T>
double max_slice_rank_ratio(const DenseMatrix<T>& a, std::size_t b);

}  // namespace monarch
