#pragma once

// Reverse-mode gradients through the Monarch matvec path
//   y = R x, y' = P y, z = Ltilde y', out = P^T z.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "monarch/monarch.hpp"

namespace monarch {

/// Cotangents shaped like the primal factors and input.
template <Scalar T>
struct MonarchTangent {
  BlockDiagMatrix<T> dltilde;
  BlockDiagMatrix<T> dr;
  std::vector<T> dx;
};

/// Cotangents of f = Re <upstream, M x> (conjugate-linear in the first slot
/// for complex T). For real T this is the plain gradient.
template <Scalar T>
MonarchTangent<T> matvec_vjp(const MonarchMatrix<T>& m, std::span<const T> x, std::span<const T> upstream,
                             int threads = 1);

enum class ParamKind { Ltilde, R, X };

struct Coordinate {
  ParamKind kind = ParamKind::X;
  std::size_t block = 0;
  std::size_t row = 0;
  std::size_t col = 0;  // index into x when kind == X

  friend bool operator==(const Coordinate&, const Coordinate&) = default;
};

struct CoordinateCheck {
  Coordinate where;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
  bool pass = true;
};

struct GradcheckReport {
  double max_rel_error = 0.0;
  Coordinate worst;
  std::size_t checked = 0;
  std::vector<CoordinateCheck> failures;
  bool pass = true;
};

inline constexpr double kGradcheckStep = 1e-5;
inline constexpr double kGradcheckRelTol = 1e-6;
inline constexpr double kGradcheckAbsFloor = 1e-8;

/// Compares a supplied tangent for f = <upstream, M x> against central
/// differences with step h = 1e-5 * max(1, |theta|). Coordinate error is
/// |a - fd| / max(|a|, |fd|); it passes when that is <= 1e-6 or when
/// |a - fd| <= 1e-8.
GradcheckReport gradcheck_tangent(const MonarchMatrix<double>& m, std::span<const double> x,
                                  std::span<const double> upstream, const MonarchTangent<double>& tangent);

/// Draws a standard-normal upstream from seed, runs matvec_vjp and checks
/// every Ltilde, R and x coordinate.
GradcheckReport gradcheck(const MonarchMatrix<double>& m, std::span<const double> x, std::uint64_t seed);

}  // namespace monarch
