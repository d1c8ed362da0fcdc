#include "qrwt/superoperator.hpp"

#include <stdexcept>

namespace qrwt {

Vector vec(const Matrix& a) {
  return Eigen::Map<const Vector>(a.data(), a.size());
}

Matrix unvec(const Vector& v, OperatorShape shape) {
  if (v.size() != shape.size()) throw std::invalid_argument("unvec: size mismatch");
  return Eigen::Map<const Matrix>(v.data(), shape.rows, shape.cols);
}

Superoperator::Superoperator(OperatorShape in, OperatorShape out, Matrix matrix)
    : in_(in), out_(out), matrix_(std::move(matrix)) {
  if (matrix_.rows() != out_.size() || matrix_.cols() != in_.size())
    throw std::invalid_argument("Superoperator: matrix shape does not match operator shapes");
}

Superoperator Superoperator::from_map(OperatorShape in, OperatorShape out, const Map& map) {
  Matrix m(out.size(), in.size());
  for (Index j = 0; j < in.cols; ++j) {
    for (Index i = 0; i < in.rows; ++i) {
      Matrix e = Matrix::Zero(in.rows, in.cols);
      e(i, j) = 1.0;
      const Matrix image = map(e);
      if (image.rows() != out.rows || image.cols() != out.cols)
        throw std::invalid_argument("Superoperator::from_map: map returned wrong shape");
      m.col(i + in.rows * j) = vec(image);
    }
  }
  return {in, out, std::move(m)};
}

Superoperator Superoperator::identity(OperatorShape shape) {
  return {shape, shape, qrwt::identity(shape.size())};
}

Superoperator Superoperator::zero(OperatorShape in, OperatorShape out) {
  return {in, out, Matrix::Zero(out.size(), in.size())};
}

Matrix Superoperator::operator()(const Matrix& a) const {
  if (a.rows() != in_.rows || a.cols() != in_.cols)
    throw std::invalid_argument("Superoperator: argument has wrong shape");
  return unvec(matrix_ * vec(a), out_);
}

Superoperator Superoperator::operator+(const Superoperator& other) const {
  if (in_ != other.in_ || out_ != other.out_)
    throw std::invalid_argument("Superoperator: shape mismatch in sum");
  return {in_, out_, matrix_ + other.matrix_};
}

Superoperator Superoperator::operator-(const Superoperator& other) const {
  if (in_ != other.in_ || out_ != other.out_)
    throw std::invalid_argument("Superoperator: shape mismatch in difference");
  return {in_, out_, matrix_ - other.matrix_};
}

Superoperator Superoperator::operator*(Complex scale) const {
  return {in_, out_, scale * matrix_};
}

Superoperator compose(const Superoperator& outer, const Superoperator& inner) {
  if (inner.out_shape() != outer.in_shape())
    throw std::invalid_argument("compose: inner output shape differs from outer input shape");
  return {inner.in_shape(), outer.out_shape(), outer.matrix() * inner.matrix()};
}

Superoperator superop_exp(const Superoperator& l, double t) {
  if (!l.is_endomorphism())
    throw std::invalid_argument("superop_exp: map must send a space to itself");
  return {l.in_shape(), l.out_shape(), mat_exp(t * l.matrix())};
}

double superop_distance(const Superoperator& p, const Superoperator& q) {
  if (p.in_shape() != q.in_shape() || p.out_shape() != q.out_shape())
    throw std::invalid_argument("superop_distance: shape mismatch");
  return (p.matrix() - q.matrix()).norm();
}

Matrix choi_matrix(const Superoperator& phi) {
  const OperatorShape in = phi.in_shape();
  const OperatorShape out = phi.out_shape();
  if (in.rows != in.cols) throw std::invalid_argument("choi_matrix: input space must be square");
  const Index n = in.rows;
  Matrix choi = Matrix::Zero(n * out.rows, n * out.cols);
  for (Index p = 0; p < n; ++p) {
    for (Index q = 0; q < n; ++q) {
      Matrix e = Matrix::Zero(n, n);
      e(p, q) = 1.0;
      choi.block(p * out.rows, q * out.cols, out.rows, out.cols) = phi(e);
    }
  }
  return choi;
}

}  // namespace qrwt
