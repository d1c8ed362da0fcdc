// Dense complex linear algebra shared by every module.
//
// Tensor-product convention: in kron(A, B) the left factor carries the slow
// index, so (A (x) B)[(i,k),(j,l)] = A[i,j] B[k,l] at row i*dim(B)+k.  The
// system space h is always the leftmost factor.
#pragma once

#include <complex>
#include <string_view>

#include <Eigen/Dense>

namespace qrwt {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kHermitianTol = 1e-12;

Matrix identity(Index n);

Matrix kron(const Matrix& a, const Matrix& b);
Vector kron(const Vector& a, const Vector& b);

/// E^x T E_y, where E_y : u -> u (x) y.  T acts on H (x) K with dim K = x.size();
/// the result is conjugate-linear in x and linear in y.
Matrix slice(const Matrix& t, const Vector& x, const Vector& y);

/// ||A - A*||_F <= tol * max(1, ||A||_F).
bool is_hermitian(const Matrix& a, double tol = kHermitianTol);

/// Throws std::invalid_argument naming `what` if `a` is not Hermitian.
void require_hermitian(const Matrix& a, std::string_view what,
                       double tol = kHermitianTol);
void require_square(const Matrix& a, std::string_view what);

/// e^A by scaling and squaring.
Matrix mat_exp(const Matrix& a);

/// e^{factor * H} for Hermitian H, computed spectrally.
Matrix exp_hermitian(const Matrix& h, Complex factor);

/// Decapitated exponentials: exp_1(z) = (e^z - 1)/z and
/// exp_2(z) = (e^z - 1 - z)/z^2, continued analytically through z = 0.
/// `order` is 0, 1 or 2 (order 0 is the ordinary exponential).
Complex decap_exp(int order, Complex z);

/// exp_order(factor * H) for Hermitian H, applied through the spectrum of H.
Matrix decap_exp(int order, const Matrix& hermitian, Complex factor);

/// Smallest eigenvalue of the Hermitian part of a square matrix.
double min_hermitian_eigenvalue(const Matrix& a);

/// Orthonormal basis of a finite-dimensional space split into an ordered front
/// block (columns [0, split)) and back block (columns [split, dim)).
class SubspaceSplit {
 public:
  SubspaceSplit() = default;
  SubspaceSplit(Matrix basis, Index split);

  Index total_dim() const { return basis_.rows(); }
  Index front_dim() const { return split_; }
  Index back_dim() const { return basis_.cols() - split_; }

  const Matrix& basis() const { return basis_; }
  Matrix front() const { return basis_.leftCols(split_); }
  Matrix back() const { return basis_.rightCols(back_dim()); }
  Matrix front_projector() const;
  Matrix back_projector() const;

  // Isometries I_left (x) front and I_left (x) back.
  Matrix front_isometry(Index left_dim) const;
  Matrix back_isometry(Index left_dim) const;

  // Block coordinates of an operator on C^left (x) (front + back).
  Matrix front_front(const Matrix& t) const;
  Matrix front_back(const Matrix& t) const;
  Matrix back_front(const Matrix& t) const;
  Matrix back_back(const Matrix& t) const;

  /// Inverse of the block extraction; any block may be empty (size zero)
  /// to mean zero.
  Matrix assemble(Index left_dim, const Matrix& ff, const Matrix& fb,
                  const Matrix& bf, const Matrix& bb) const;

  /// Left dimension of an operator on C^left (x) (front + back).
  Index left_dim_of(const Matrix& t) const;

 private:
  Matrix basis_;
  Index split_ = 0;
};

}  // namespace qrwt
