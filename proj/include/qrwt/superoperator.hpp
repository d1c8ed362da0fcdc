// Linear maps between matrix spaces, stored as matrices acting on
// column-vectorised operators: vec(A)[i + rows * j] = A(i, j).
#pragma once

#include <functional>

#include "qrwt/linalg.hpp"

namespace qrwt {

struct OperatorShape {
  Index rows = 0;
  Index cols = 0;

  static OperatorShape square(Index n) { return {n, n}; }
  Index size() const { return rows * cols; }
  bool operator==(const OperatorShape&) const = default;
};

Vector vec(const Matrix& a);
Matrix unvec(const Vector& v, OperatorShape shape);

class Superoperator {
 public:
  using Map = std::function<Matrix(const Matrix&)>;

  Superoperator() = default;
  Superoperator(OperatorShape in, OperatorShape out, Matrix matrix);

  /// Tabulates `map` on the elementary matrices of the input space.
  static Superoperator from_map(OperatorShape in, OperatorShape out, const Map& map);
  static Superoperator identity(OperatorShape shape);
  static Superoperator zero(OperatorShape in, OperatorShape out);

  OperatorShape in_shape() const { return in_; }
  OperatorShape out_shape() const { return out_; }
  const Matrix& matrix() const { return matrix_; }
  bool is_endomorphism() const { return in_ == out_; }

  Matrix operator()(const Matrix& a) const;

  Superoperator operator+(const Superoperator& other) const;
  Superoperator operator-(const Superoperator& other) const;
  Superoperator operator*(Complex scale) const;

 private:
  OperatorShape in_;
  OperatorShape out_;
  Matrix matrix_;
};

/// outer o inner.
Superoperator compose(const Superoperator& outer, const Superoperator& inner);

/// e^{tL} for an endomorphism L.
Superoperator superop_exp(const Superoperator& l, double t);

/// Frobenius norm of the difference of the representing matrices.
double superop_distance(const Superoperator& p, const Superoperator& q);

/// Choi matrix sum_{pq} e_pq (x) Phi(e_pq) of a map on square matrices.
Matrix choi_matrix(const Superoperator& phi);

}  // namespace qrwt
