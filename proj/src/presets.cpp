#include "qrwt/presets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qrwt/random.hpp"

namespace qrwt {

Matrix from_particle_blocks(const std::vector<std::vector<Matrix>>& blocks) {
  const Index n = static_cast<Index>(blocks.size());
  if (n == 0 || blocks[0].empty()) throw std::invalid_argument("from_particle_blocks: no blocks");
  const Index dh = blocks[0][0].rows();
  Matrix out = Matrix::Zero(dh * n, dh * n);
  for (Index i = 0; i < n; ++i) {
    if (static_cast<Index>(blocks[i].size()) != n)
      throw std::invalid_argument("from_particle_blocks: block array must be square");
    for (Index j = 0; j < n; ++j) {
      const Matrix& x = blocks[i][j];
      if (x.size() == 0) continue;
      if (x.rows() != dh || x.cols() != dh)
        throw std::invalid_argument("from_particle_blocks: blocks differ in size");
      Matrix unit = Matrix::Zero(n, n);
      unit(i, j) = 1.0;
      out += kron(x, unit);
    }
  }
  return out;
}

Matrix particle_block(const Matrix& t, Index i, Index j, Index n) {
  return slice(t, Vector::Unit(n, i), Vector::Unit(n, j));
}

HamiltonianSpec random_hamiltonian_spec(const CondExp& c, Index system_dim, std::uint64_t seed,
                                        bool perturbed, double scale) {
  RandomSource rng(seed);
  const Index s = system_dim * c.split.front_dim();
  const Index x = system_dim * c.split.back_dim();
  HamiltonianSpec spec;
  spec.system_dim = system_dim;
  spec.h_d = scale * apply_e0(c, rng.hermitian(s));
  const Matrix h2 = rng.hermitian(s);
  spec.h_o = scale * (h2 - apply_e0(c, h2));
  spec.l = scale * rng.matrix(x, s);
  spec.h_x = scale * rng.hermitian(x);
  if (perturbed) {
    spec.r00 = scale * rng.hermitian(s);
    spec.r0x = scale * rng.matrix(x, s);
    spec.rxx = scale * rng.hermitian(x);
  }
  return spec;
}

Matrix C3Example::density() const {
  Matrix rho = Matrix::Zero(3, 3);
  rho(0, 0) = lambda1;
  rho(1, 1) = lambda2;
  return rho;
}

HamiltonianSpec C3Example::spec(const SubspaceSplit& split) const {
  const Matrix z = Matrix::Zero(system_dim(), system_dim());
  const Matrix hd = from_particle_blocks({{b, z, z}, {z, c, z}, {z, z, z}});
  const Matrix ho = from_particle_blocks({{z, g.adjoint(), z}, {g, z, z}, {z, z, z}});
  const Matrix lm = from_particle_blocks({{z, z, z}, {z, z, z}, {l, m, z}});
  const Matrix hx = from_particle_blocks({{z, z, z}, {z, z, z}, {z, z, h}});
  HamiltonianSpec out;
  out.system_dim = system_dim();
  out.h_d = split.front_front(hd);
  out.h_o = split.front_front(ho);
  out.l = split.back_front(lm);
  out.h_x = split.back_back(hx);
  return out;
}

std::vector<std::vector<Matrix>> C3Example::f_entries() const {
  const Matrix e1 = decap_exp(1, h, -kI);
  const Matrix e2 = decap_exp(2, h, -kI);
  const Matrix id = identity(system_dim());
  const Matrix ga = g.adjoint();
  const Matrix la = l.adjoint();
  const Matrix ma = m.adjoint();
  return {
      {-kI * b - 0.5 * ga * g - la * e2 * l, -kI * ga, -kI * la * e1},
      {-kI * g, -kI * c - 0.5 * g * ga - ma * e2 * m, -kI * ma * e1},
      {-kI * e1 * l, -kI * e1 * m, exp_hermitian(h, -kI) - id},
  };
}

C3Example random_c3_example(Index system_dim, std::uint64_t seed, double lambda1) {
  if (!(lambda1 > 0.0 && lambda1 < 1.0))
    throw std::invalid_argument("example: lambda1 must lie in (0, 1)");
  RandomSource rng(seed);
  constexpr double scale = 0.5;
  C3Example ex;
  ex.lambda1 = lambda1;
  ex.lambda2 = 1.0 - lambda1;
  ex.b = scale * rng.hermitian(system_dim);
  ex.c = scale * rng.hermitian(system_dim);
  ex.g = scale * rng.matrix(system_dim, system_dim);
  ex.l = scale * rng.matrix(system_dim, system_dim);
  ex.m = scale * rng.matrix(system_dim, system_dim);
  ex.h = scale * rng.hermitian(system_dim);
  return ex;
}

double C3Report::max_residual() const {
  return std::max({f_entry_residual, vacuum_residual, creation_residual, annihilation_residual,
                   gauge_residual});
}

C3Report run_c3_example(const C3Example& ex, std::uint64_t seed, int trials) {
  const GnsData g = build_gns(ex.density());
  const CondExp c = build_cond_exp(g, singleton_blocks(g.support_dim()));
  const HamiltonianLimit lim = f_from_hamiltonian(ex.spec(g.split), c);
  const Matrix& f = lim.f;
  const Index dh = ex.system_dim();
  const auto printed = ex.f_entries();

  C3Report report;
  std::vector<std::vector<Matrix>> fb(3, std::vector<Matrix>(3));
  for (Index p = 0; p < 3; ++p)
    for (Index q = 0; q < 3; ++q) {
      fb[p][q] = particle_block(f, p, q, 3);
      report.f_entry_residual =
          std::max(report.f_entry_residual, (fb[p][q] - printed[p][q]).norm());
    }

  const double lambda[2] = {ex.lambda1, ex.lambda2};
  auto f_vec = [&](Index i, Index j) {
    Matrix x = Matrix::Zero(3, 3);
    x(i, j) = 1.0 / std::sqrt(lambda[j]);
    return bracket(g, x);
  };
  const std::pair<Index, Index> pairs[] = {{0, 1}, {1, 0}, {2, 0}, {2, 1}};

  const LimitGenerator lg = limit_generator_from_f(f, g, c);
  RandomSource rng(seed);
  for (int trial = 0; trial < trials; ++trial) {
    const Matrix a = rng.matrix(dh, dh);
    const Matrix value = lg.psi(a);
    report.vacuum_residual = std::max(
        report.vacuum_residual,
        (slice(value, g.omega, g.omega) - a * (ex.lambda1 * fb[0][0] + ex.lambda2 * fb[1][1])).norm());
    for (const auto& [i, j] : pairs) {
      const Vector fij = f_vec(i, j);
      const double root = std::sqrt(lambda[j]);
      report.creation_residual = std::max(
          report.creation_residual, (slice(value, fij, g.omega) - root * a * fb[i][j]).norm());
      report.annihilation_residual = std::max(
          report.annihilation_residual, (slice(value, g.omega, fij) - root * a * fb[j][i]).norm());
    }
    for (Index k = 0; k < 2; ++k)
      for (Index l = 0; l < 2; ++l) {
        const Matrix expected = k == l ? Matrix(a * fb[2][2]) : Matrix::Zero(dh, dh);
        report.gauge_residual = std::max(
            report.gauge_residual, (slice(value, f_vec(2, k), f_vec(2, l)) - expected).norm());
      }
  }
  report.count = effective_noise_count(lg, g, trials, seed);
  report.rank_l = c.rank_l;
  report.bound = noise_bound(g.particle_dim(), g.support_dim(), c.rank_l);
  report.unitary = hp_check(*lg.g_matrix, g).unitary;
  return report;
}

}  // namespace qrwt
