#pragma once

#include <cmath>
#include <complex>
#include <concepts>
#include <string_view>

namespace monarch {

using cplx = std::complex<double>;

enum class Field { Real, Complex };

template <typename T>
concept Scalar = std::same_as<T, double> || std::same_as<T, cplx>;

template <Scalar T>
inline constexpr bool is_complex_v = std::same_as<T, cplx>;

template <Scalar T>
inline constexpr Field field_of_v = is_complex_v<T> ? Field::Complex : Field::Real;

inline constexpr std::string_view field_name(Field f) {
  return f == Field::Real ? "real" : "complex";
}

// std::conj(double) returns a complex; keep the scalar type instead.
template <Scalar T>
inline T conj_of(T v) {
  if constexpr (is_complex_v<T>) {
    return std::conj(v);
  } else {
    return v;
  }
}

template <Scalar T>
inline double abs2(T v) {
  if constexpr (is_complex_v<T>) {
    return std::norm(v);
  } else {
    return v * v;
  }
}

template <Scalar T>
inline bool is_finite(T v) {
  if constexpr (is_complex_v<T>) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  } else {
    return std::isfinite(v);
  }
}

// Unit-modulus phase of v (1 for v == 0).
template <Scalar T>
inline T phase_of(T v) {
  const double r = std::abs(v);
  if (r == 0.0) return T(1.0);
  return v / r;
}

}  // namespace monarch
