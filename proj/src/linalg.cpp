#include "qrwt/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace qrwt {

namespace {

// Below this modulus the Taylor series is summed directly.  The closed forms
// suffer cancellation of order eps/|z|^order, so the series is kept well past
// the point where that becomes visible.
constexpr double kSeriesRadius = 1.0;
constexpr int kSeriesTerms = 30;

// e^z - 1 without cancellation for small Re z.
Complex expm1(Complex z) {
  const double x = z.real();
  const double y = z.imag();
  const double s = std::sin(0.5 * y);
  return {std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y)};
}

Complex decap_series(int order, Complex z) {
  // sum_{n >= order} z^{n - order} / n!
  double factorial = 1.0;
  for (int n = 2; n <= order; ++n) factorial *= n;
  Complex term = 1.0 / factorial;
  Complex sum = term;
  for (int j = 1; j < kSeriesTerms; ++j) {
    term *= z / static_cast<double>(order + j);
    sum += term;
  }
  return sum;
}

}  // namespace

Matrix identity(Index n) { return Matrix::Identity(n, n); }

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

Matrix slice(const Matrix& t, const Vector& x, const Vector& y) {
  const Index k = x.size();
  if (y.size() != k || k == 0 || t.rows() != t.cols() || t.rows() % k != 0)
    throw std::invalid_argument("slice: dimension mismatch");
  const Index h = t.rows() / k;
  Matrix out = Matrix::Zero(h, h);
  for (Index p = 0; p < h; ++p)
    for (Index q = 0; q < h; ++q)
      out(p, q) = x.dot(t.block(p * k, q * k, k, k) * y);
  return out;
}

bool is_hermitian(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return (a - a.adjoint()).norm() <= tol * std::max(1.0, a.norm());
}

void require_hermitian(const Matrix& a, std::string_view what, double tol) {
  if (!is_hermitian(a, tol))
    throw std::invalid_argument(std::string(what) + " must be Hermitian");
}

void require_square(const Matrix& a, std::string_view what) {
  if (a.rows() != a.cols())
    throw std::invalid_argument(std::string(what) + " must be square");
}

Matrix mat_exp(const Matrix& a) {
  require_square(a, "mat_exp argument");
  if (a.size() == 0) return a;
  return a.exp();
}

Matrix exp_hermitian(const Matrix& h, Complex factor) {
  return decap_exp(0, h, factor);
}

Complex decap_exp(int order, Complex z) {
  if (order < 0 || order > 2)
    throw std::invalid_argument("decap_exp: order must be 0, 1 or 2");
  if (order == 0) return std::exp(z);
  if (std::abs(z) < kSeriesRadius) return decap_series(order, z);
  const Complex e1 = expm1(z) / z;
  if (order == 1) return e1;
  return (e1 - 1.0) / z;
}

Matrix decap_exp(int order, const Matrix& hermitian, Complex factor) {
  require_hermitian(hermitian, "decap_exp argument");
  if (hermitian.size() == 0) return hermitian;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(hermitian);
  const Matrix& v = eig.eigenvectors();
  Vector values(v.cols());
  for (Index j = 0; j < values.size(); ++j)
    values(j) = decap_exp(order, factor * eig.eigenvalues()(j));
  return v * values.asDiagonal() * v.adjoint();
}

double min_hermitian_eigenvalue(const Matrix& a) {
  require_square(a, "min_hermitian_eigenvalue argument");
  const Matrix herm = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(herm, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

SubspaceSplit::SubspaceSplit(Matrix basis, Index split)
    : basis_(std::move(basis)), split_(split) {
  if (basis_.rows() != basis_.cols())
    throw std::invalid_argument("SubspaceSplit: basis must be square");
  if (split_ < 0 || split_ > basis_.cols())
    throw std::invalid_argument("SubspaceSplit: split index out of range");
  const Matrix gram = basis_.adjoint() * basis_;
  if ((gram - identity(basis_.cols())).norm() > 1e-12 * std::max<Index>(1, basis_.cols()))
    throw std::invalid_argument("SubspaceSplit: basis is not orthonormal");
}

Matrix SubspaceSplit::front_projector() const {
  const Matrix f = front();
  return f * f.adjoint();
}

Matrix SubspaceSplit::back_projector() const {
  const Matrix b = back();
  return b * b.adjoint();
}

Matrix SubspaceSplit::front_isometry(Index left_dim) const {
  return kron(identity(left_dim), front());
}

Matrix SubspaceSplit::back_isometry(Index left_dim) const {
  return kron(identity(left_dim), back());
}

Index SubspaceSplit::left_dim_of(const Matrix& t) const {
  if (t.rows() != t.cols() || total_dim() == 0 || t.rows() % total_dim() != 0)
    throw std::invalid_argument("SubspaceSplit: operator has incompatible dimension");
  return t.rows() / total_dim();
}

Matrix SubspaceSplit::front_front(const Matrix& t) const {
  const Matrix f = front_isometry(left_dim_of(t));
  return f.adjoint() * t * f;
}

Matrix SubspaceSplit::front_back(const Matrix& t) const {
  const Index left = left_dim_of(t);
  return front_isometry(left).adjoint() * t * back_isometry(left);
}

Matrix SubspaceSplit::back_front(const Matrix& t) const {
  const Index left = left_dim_of(t);
  return back_isometry(left).adjoint() * t * front_isometry(left);
}

Matrix SubspaceSplit::back_back(const Matrix& t) const {
  const Matrix b = back_isometry(left_dim_of(t));
  return b.adjoint() * t * b;
}

Matrix SubspaceSplit::assemble(Index left_dim, const Matrix& ff, const Matrix& fb,
                               const Matrix& bf, const Matrix& bb) const {
  const Matrix f = front_isometry(left_dim);
  const Matrix b = back_isometry(left_dim);
  Matrix out = Matrix::Zero(left_dim * total_dim(), left_dim * total_dim());
  auto add = [&out](const Matrix& lhs, const Matrix& block, const Matrix& rhs) {
    if (block.size() == 0) return;
    if (block.rows() != lhs.cols() || block.cols() != rhs.cols())
      throw std::invalid_argument("SubspaceSplit::assemble: block shape mismatch");
    out += lhs * block * rhs.adjoint();
  };
  add(f, ff, f);
  add(f, fb, b);
  add(b, bf, f);
  add(b, bb, b);
  return out;
}

}  // namespace qrwt
