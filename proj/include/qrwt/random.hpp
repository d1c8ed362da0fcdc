// Seeded complex Gaussian sampling used for genericity checks.
#pragma once

#include <cstdint>
#include <random>

#include "qrwt/linalg.hpp"

namespace qrwt {

class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

  double real() { return normal_(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  /// Standard complex normal: real and imaginary parts N(0, 1/2).
  Complex complex() {
    constexpr double s = 0.70710678118654752440;
    const double re = real();
    const double im = real();
    return {s * re, s * im};
  }

  Matrix matrix(Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = complex();
    return m;
  }

  Vector vector(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = complex();
    return v;
  }

  Matrix hermitian(Index n) {
    const Matrix m = matrix(n, n);
    return 0.5 * (m + m.adjoint());
  }

  /// Random full-rank density matrix.
  Matrix density(Index n) {
    const Matrix m = matrix(n, n);
    Matrix rho = m * m.adjoint();
    rho /= rho.trace().real();
    return 0.5 * (rho + rho.adjoint());
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace qrwt
