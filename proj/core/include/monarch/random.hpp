#pragma once

#include <cstdint>
#include <random>

#include "monarch/numerics.hpp"

namespace monarch {

/// Seeded standard-normal source. Complex draws use independent real and
/// imaginary parts.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return dist_(engine_); }

  template <Scalar T>
  T draw() {
    if constexpr (is_complex_v<T>) {
      const double re = normal();
      const double im = normal();
      return {re, im};
    } else {
      return normal();
    }
  }

  template <Scalar T>
  DenseMatrix<T> matrix(std::size_t rows, std::size_t cols) {
    DenseMatrix<T> out(rows, cols);
    for (T& v : out.data()) v = draw<T>();
    return out;
  }

  template <Scalar T>
  std::vector<T> vector(std::size_t n) {
    std::vector<T> out(n);
    for (T& v : out) v = draw<T>();
    return out;
  }

  std::uint64_t next_seed() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace monarch
