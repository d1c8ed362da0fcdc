#include "qrwt/state_gns.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace qrwt {

namespace {

constexpr double kTraceTol = 1e-12;
constexpr double kNegativeTol = 1e-12;
constexpr double kClusterTol = 1e-11;
constexpr double kDropTol = 1e-10;

// Gram-Schmidt over `candidates` (columns), skipping vectors whose residual
// norm falls below kDropTol.  Vectors already in `start` are kept first.
Matrix gram_schmidt(const Matrix& start, const Matrix& candidates, Index wanted) {
  std::vector<Vector> basis;
  for (Index c = 0; c < start.cols(); ++c) basis.emplace_back(start.col(c));
  const Index base = static_cast<Index>(basis.size());
  for (Index c = 0; c < candidates.cols() && static_cast<Index>(basis.size()) - base < wanted; ++c) {
    Vector v = candidates.col(c);
    for (int pass = 0; pass < 2; ++pass)
      for (const Vector& q : basis) v -= q.dot(v) * q;
    const double n = v.norm();
    if (n > kDropTol) basis.emplace_back(v / n);
  }
  Matrix out(candidates.rows(), static_cast<Index>(basis.size()) - base);
  for (Index c = 0; c < out.cols(); ++c) out.col(c) = basis[base + c];
  return out;
}

// Deterministic orthonormal basis of the column span of `v`: Gram-Schmidt on the
// projections of the canonical basis vectors.
Matrix canonical_basis_of_span(const Matrix& v) {
  const Matrix projector = v * v.adjoint();
  return gram_schmidt(Matrix(v.rows(), 0), projector, v.cols());
}

// Row-major vectorisation (first index slow).
Vector row_major(const Matrix& m) {
  Vector out(m.size());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) out(i * m.cols() + j) = m(i, j);
  return out;
}

}  // namespace

DensityState make_density_state(const Matrix& rho, double support_tol) {
  if (!(support_tol > 0.0)) throw std::invalid_argument("support_tol must be positive");
  require_square(rho, "density matrix");
  if (rho.rows() == 0) throw std::invalid_argument("density matrix must be non-empty");
  require_hermitian(rho, "density matrix");
  const Complex trace = rho.trace();
  if (std::abs(trace - 1.0) > kTraceTol)
    throw std::invalid_argument("density matrix must have unit trace");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (rho + rho.adjoint()));
  const RealVector ascending = eig.eigenvalues();
  if (ascending.minCoeff() < -kNegativeTol)
    throw std::invalid_argument("density matrix must be positive semidefinite");

  const Index n = rho.rows();
  std::vector<Index> order(n);
  for (Index i = 0; i < n; ++i) order[i] = n - 1 - i;  // descending

  DensityState out;
  out.rho = rho;
  out.eigenvalues = RealVector::Zero(n);
  out.eigenvectors = Matrix::Zero(n, n);

  Index column = 0;
  Index pos = 0;
  while (pos < n) {
    const double lead = ascending(order[pos]);
    const bool kernel = lead <= support_tol;
    Index end = pos + 1;
    while (end < n) {
      const double next = ascending(order[end]);
      const bool same = kernel ? next <= support_tol : std::abs(next - lead) <= kClusterTol;
      if (!same) break;
      ++end;
    }
    Matrix cluster(n, end - pos);
    double mean = 0.0;
    for (Index c = pos; c < end; ++c) {
      cluster.col(c - pos) = eig.eigenvectors().col(order[c]);
      mean += ascending(order[c]);
    }
    mean /= static_cast<double>(end - pos);
    const Matrix basis = canonical_basis_of_span(cluster);
    out.eigenvectors.middleCols(column, basis.cols()) = basis;
    for (Index c = 0; c < basis.cols(); ++c) out.eigenvalues(column + c) = kernel ? 0.0 : mean;
    if (!kernel) out.support_rank += basis.cols();
    column += basis.cols();
    pos = end;
  }
  return out;
}

GnsData build_gns(const Matrix& rho, double support_tol) {
  GnsData g;
  g.state = make_density_state(rho, support_tol);
  const Index n = g.state.dim();
  const Index r = g.state.support_rank;
  g.split = SubspaceSplit(g.state.eigenvectors, r);
  g.p0 = g.split.front_projector();
  const Matrix f0 = g.split.front();
  g.rho0 = f0.adjoint() * rho * f0;
  g.weights = g.state.eigenvalues.head(r);

  Matrix root = f0;
  for (Index j = 0; j < r; ++j) root.col(j) *= std::sqrt(g.weights(j));
  g.omega = row_major(root);

  // Candidates b_i (x) conj(e_j) over the full eigenbasis b of k, lexicographic.
  Matrix candidates(n * r, n * r);
  Index c = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < r; ++j) {
      Matrix m = Matrix::Zero(n, r);
      m.col(j) = g.state.eigenvectors.col(i);
      candidates.col(c++) = row_major(m);
    }
  }
  Matrix start(n * r, 1);
  start.col(0) = g.omega;
  g.mu_basis = gram_schmidt(start, candidates, n * r - 1);
  if (g.mu_basis.cols() != n * r - 1)
    throw std::logic_error("build_gns: failed to complete the noise basis");
  return g;
}

Complex state_value(const GnsData& g, const Matrix& x) {
  if (x.rows() != g.particle_dim() || x.cols() != g.particle_dim())
    throw std::invalid_argument("state_value: dimension mismatch");
  const Matrix f0 = g.support_basis();
  Complex sum = 0.0;
  for (Index j = 0; j < f0.cols(); ++j) sum += g.weights(j) * f0.col(j).dot(x * f0.col(j));
  return sum;
}

Matrix represent(const GnsData& g, const Matrix& x) {
  if (x.rows() != g.particle_dim() || x.cols() != g.particle_dim())
    throw std::invalid_argument("represent: dimension mismatch");
  return kron(x, identity(g.support_dim()));
}

Vector bracket(const GnsData& g, const Matrix& x) {
  if (x.rows() != g.particle_dim() || x.cols() != g.particle_dim())
    throw std::invalid_argument("bracket: dimension mismatch");
  Matrix root = g.support_basis();
  for (Index j = 0; j < root.cols(); ++j) root.col(j) *= std::sqrt(g.weights(j));
  return row_major(x * root);
}

Matrix ampliate_pi(const GnsData& g, const Matrix& t) {
  if (t.rows() != t.cols() || t.rows() % g.particle_dim() != 0)
    throw std::invalid_argument("ampliate_pi: dimension mismatch");
  return kron(t, identity(g.support_dim()));
}

Matrix slice_state(const GnsData& g, const Matrix& t) {
  if (t.rows() != t.cols() || t.rows() % g.particle_dim() != 0)
    throw std::invalid_argument("slice_state: dimension mismatch");
  const Matrix f0 = g.support_basis();
  const Index h = t.rows() / g.particle_dim();
  Matrix out = Matrix::Zero(h, h);
  for (Index j = 0; j < f0.cols(); ++j) out += g.weights(j) * slice(t, f0.col(j), f0.col(j));
  return out;
}

Matrix vacuum_projector(const GnsData& g, Index system_dim) {
  return kron(identity(system_dim), g.omega * g.omega.adjoint());
}

Matrix noise_projector(const GnsData& g, Index system_dim) {
  return identity(system_dim * g.khat_dim()) - vacuum_projector(g, system_dim);
}

Vector hat(const GnsData& g, const Vector& x) {
  if (x.size() != g.khat_dim()) throw std::invalid_argument("hat: dimension mismatch");
  return g.omega + x;
}

Vector from_mu_coordinates(const GnsData& g, const Vector& coords) {
  if (coords.size() != g.mu_basis.cols())
    throw std::invalid_argument("noise-space coordinates have the wrong length");
  return g.mu_basis * coords;
}

}  // namespace qrwt
