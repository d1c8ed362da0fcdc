#include "qrwt/cond_exp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qrwt/random.hpp"

namespace qrwt {

namespace {

constexpr double kCommuteTol = 1e-10;
constexpr double kReportTol = 1e-11;
constexpr double kChoiTol = -1e-10;

// Applies `map` (on n x n operators) to every n x n block of an operator on
// C^left (x) C^n, i.e. id (x) map.
Matrix apply_blockwise(const Superoperator& map, const Matrix& t) {
  const Index n = map.in_shape().rows;
  if (t.rows() != t.cols() || n == 0 || t.rows() % n != 0)
    throw std::invalid_argument("conditional expectation: operator has incompatible dimension");
  const Index left = t.rows() / n;
  Matrix out(t.rows(), t.cols());
  for (Index p = 0; p < left; ++p)
    for (Index q = 0; q < left; ++q)
      out.block(p * n, q * n, n, n) = map(t.block(p * n, q * n, n, n));
  return out;
}

Superoperator extend(const SubspaceSplit& split, const Superoperator& d0) {
  const Matrix f0 = split.front();
  const Index n = split.total_dim();
  return Superoperator::from_map(OperatorShape::square(n), OperatorShape::square(n),
                                 [&](const Matrix& x) -> Matrix {
                                   return f0 * d0(f0.adjoint() * x * f0) * f0.adjoint();
                                 });
}

Index numerical_rank(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const RealVector s = svd.singularValues();
  if (s.size() == 0) return 0;
  const double cutoff = 1e-10 * std::max(1.0, s(0));
  return static_cast<Index>((s.array() > cutoff).count());
}

}  // namespace

BlockPartition singleton_blocks(Index support_dim) {
  BlockPartition blocks;
  for (Index i = 0; i < support_dim; ++i) blocks.push_back({i});
  return blocks;
}

BlockPartition single_block(Index support_dim) {
  std::vector<Index> all(support_dim);
  for (Index i = 0; i < support_dim; ++i) all[i] = i;
  return {all};
}

CondExp build_cond_exp(const GnsData& g, const BlockPartition& blocks) {
  const Index r = g.support_dim();
  std::vector<int> seen(r, 0);
  for (const auto& block : blocks) {
    if (block.empty()) throw std::invalid_argument("blocks: empty block");
    for (Index i : block) {
      if (i < 0 || i >= r) throw std::invalid_argument("blocks: index outside the support");
      if (seen[i]++) throw std::invalid_argument("blocks: index appears twice");
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw std::invalid_argument("blocks: partition does not cover the support");

  std::vector<Matrix> projectors;
  Index rank = 0;
  for (const auto& block : blocks) {
    Matrix p = Matrix::Zero(r, r);
    for (Index i : block) p(i, i) = 1.0;
    if ((p * g.rho0 - g.rho0 * p).norm() > kCommuteTol)
      throw std::invalid_argument("blocks: block projector does not commute with rho0");
    projectors.push_back(std::move(p));
    rank += static_cast<Index>(block.size() * block.size());
  }

  CondExp c;
  c.blocks = blocks;
  c.split = g.split;
  c.d0 = Superoperator::from_map(OperatorShape::square(r), OperatorShape::square(r),
                                 [&](const Matrix& x) -> Matrix {
                                   Matrix out = Matrix::Zero(r, r);
                                   for (const Matrix& p : projectors) out += p * x * p;
                                   return out;
                                 });
  c.d = extend(c.split, c.d0);
  c.rank_l = rank;
  return c;
}

CondExp cond_exp_from_map(const GnsData& g, Superoperator d0) {
  const Index r = g.support_dim();
  if (d0.in_shape() != OperatorShape::square(r) || d0.out_shape() != OperatorShape::square(r))
    throw std::invalid_argument("cond_exp_from_map: map must act on B(k0)");
  CondExp c;
  c.split = g.split;
  c.d0 = std::move(d0);
  c.d = extend(c.split, c.d0);
  c.rank_l = numerical_rank(c.d0.matrix());
  return c;
}

Matrix apply_e0(const CondExp& c, const Matrix& a) { return apply_blockwise(c.d0, a); }

Matrix apply_e0_perp(const CondExp& c, const Matrix& a) { return a - apply_e0(c, a); }

Matrix apply_e(const CondExp& c, const Matrix& t) { return apply_blockwise(c.d, t); }

Matrix apply_e_perp(const CondExp& c, const Matrix& t) { return t - apply_e(c, t); }

Matrix support_projector(const CondExp& c, Index system_dim) {
  return kron(identity(system_dim), c.split.front_projector());
}

Matrix kernel_projector(const CondExp& c, Index system_dim) {
  return kron(identity(system_dim), c.split.back_projector());
}

Superoperator ampliated_superop(const CondExp& c, Index system_dim) {
  const auto shape = OperatorShape::square(system_dim * c.split.total_dim());
  return Superoperator::from_map(shape, shape, [&](const Matrix& t) { return apply_e(c, t); });
}

Matrix slice_state0(const GnsData& g, const Matrix& a) {
  const Index r = g.support_dim();
  if (a.rows() != a.cols() || a.rows() % r != 0)
    throw std::invalid_argument("slice_state0: dimension mismatch");
  const Index h = a.rows() / r;
  Matrix out = Matrix::Zero(h, h);
  for (Index j = 0; j < r; ++j) {
    const Vector e = Vector::Unit(r, j);
    out += g.weights(j) * slice(a, e, e);
  }
  return out;
}

bool CondExpReport::idempotent() const { return idempotency <= kReportTol; }
bool CondExpReport::self_adjoint() const { return self_adjointness <= kReportTol; }
bool CondExpReport::bimodular() const { return bimodule <= kReportTol; }
bool CondExpReport::preserves_state() const { return state_preservation <= kReportTol; }
bool CondExpReport::kernel_ok() const { return kernel_identities <= kReportTol; }
bool CondExpReport::completely_positive() const { return choi_min_eigenvalue >= kChoiTol; }
bool CondExpReport::passed() const {
  return idempotent() && self_adjoint() && bimodular() && preserves_state() && kernel_ok() &&
         completely_positive();
}

CondExpReport validate_cond_exp(const CondExp& c, const GnsData& g, std::uint64_t seed,
                                int trials) {
  RandomSource rng(seed);
  const Index n = g.particle_dim();
  const Index r = g.support_dim();
  constexpr Index kSystem = 2;
  CondExpReport report;

  report.idempotency = (c.d0.matrix() * c.d0.matrix() - c.d0.matrix()).norm();
  report.choi_min_eigenvalue = min_hermitian_eigenvalue(choi_matrix(c.d0));

  auto rho0_inner = [&](const Matrix& z, const Matrix& w) {
    return (g.rho0 * z.adjoint() * w).trace();
  };
  const Matrix p0 = support_projector(c, kSystem);
  const Matrix p_perp = kernel_projector(c, kSystem);

  for (int trial = 0; trial < trials; ++trial) {
    const Matrix z = rng.matrix(r, r);
    const Matrix w = rng.matrix(r, r);
    report.self_adjointness = std::max(
        report.self_adjointness, std::abs(rho0_inner(c.d0(z), w) - rho0_inner(z, c.d0(w))));

    const Matrix x = rng.matrix(n, n);
    const Matrix y = rng.matrix(n, n);
    const Matrix dx = c.d(x);
    const Matrix dy = c.d(y);
    report.bimodule = std::max({report.bimodule, (c.d(dx * y) - dx * dy).norm(),
                                (c.d(x * dy) - dx * dy).norm()});
    report.state_preservation =
        std::max(report.state_preservation, std::abs(state_value(g, dx) - state_value(g, x)));

    const Matrix t = rng.matrix(kSystem * n, kSystem * n);
    const Matrix et = apply_e(c, t);
    report.kernel_identities = std::max(
        {report.kernel_identities, (p0 * et - et).norm(), (et * p0 - et).norm(),
         (p_perp * et).norm(), (et * p_perp).norm(), apply_e(c, p_perp * t).norm(),
         apply_e(c, t * p_perp).norm(), (apply_e(c, p0 * t) - et).norm()});
  }
  return report;
}

}  // namespace qrwt
