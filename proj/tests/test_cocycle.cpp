#include <catch_amalgamated.hpp>

#include <cmath>

#include "qrwt/cocycle.hpp"
#include "support.hpp"

using namespace qrwt;
using namespace qrwt::testing;

namespace {

constexpr Index kDh = 2;

StepFunction two_interval(const GnsData& g, RandomSource& rng, double b1, double b2, double scale = 0.5) {
  return StepFunction::from_mu(g, {0.0, b1, b2},
                               {scale * rng.vector(g.khat_dim() - 1), scale * rng.vector(g.khat_dim() - 1)});
}

Matrix e0_hermitian(RandomSource& rng, const CondExp& c, Index dh) {
  const Index r = c.split.front_dim();
  return apply_e0(c, rng.hermitian(dh * r));
}

}  // namespace

TEST_CASE("cocycle of the zero generator") {
  const Fixture fx = mixed_fixture();
  RandomSource rng(1);
  const LimitGenerator lg = limit_generator(Superoperator::zero(OperatorShape::square(kDh), OperatorShape::square(6)),
                                            fx.g, fx.c);
  const StepFunction f = two_interval(fx.g, rng, 0.3, 0.8), gf = two_interval(fx.g, rng, 0.45, 1.0);
  const Matrix a = rng.matrix(kDh, kDh);
  const Vector u = rng.vector(kDh), v = rng.vector(kDh);
  for (double t : {0.0, 0.5, 2.0}) {
    const Complex got = cocycle_matrix_element(lg, fx.g, a, u, v, f, gf, t);
    CHECK(std::abs(got - u.dot(a * v) * exponential_inner(f, gf)) <= 1e-12);
  }
  CHECK_THROWS_AS(cocycle_matrix_element(lg, fx.g, a, u, v, f, gf, -1.0), std::invalid_argument);
}

TEST_CASE("scalar cocycle with a pure time coefficient") {
  const Fixture fx = mixed_fixture();
  const double alpha = 0.8;
  const Matrix value = Complex(0.0, -alpha) * fx.g.omega * fx.g.omega.adjoint();
  LimitGenerator lg;
  lg.psi = Superoperator(OperatorShape::square(1), OperatorShape::square(6), vec(value));
  const StepFunction zero = StepFunction::zero(6);
  const Matrix one = identity(1);
  const Vector e = unit(1, 0);
  for (double t : {0.0, 0.4, 3.0}) {
    const Complex got = cocycle_matrix_element(lg, fx.g, one, e, e, zero, zero, t);
    CHECK(std::abs(got - std::exp(Complex(0.0, -alpha * t))) <= 1e-13);
  }
}

TEST_CASE("cocycle matrix elements solve the sliced integral equation") {
  RandomSource rng(2);
  for (const Fixture& fx : {mixed_fixture(), pure_fixture()}) {
    const Index n = fx.g.particle_dim();
    const LimitGenerator lg = limit_generator(random_superop(rng, kDh, kDh * n) * 0.5, fx.g, fx.c);
    const StepFunction f = two_interval(fx.g, rng, 0.3, 0.8), gf = two_interval(fx.g, rng, 0.45, 1.0);
    const Matrix a = rng.matrix(kDh, kDh);
    const Vector u = rng.vector(kDh), v = rng.vector(kDh);
    const double h = 1e-5;
    for (double t : {0.2, 0.6, 0.9, 1.4}) {
      const Complex plus = cocycle_matrix_element(lg, fx.g, a, u, v, f, gf, t + h);
      const Complex minus = cocycle_matrix_element(lg, fx.g, a, u, v, f, gf, t - h);
      const Complex derivative = (plus - minus) / (2.0 * h);
      const Superoperator slice_map = cocycle_slice_map(lg, fx.g, f.value_at(t), gf.value_at(t));
      const Superoperator k_t = cocycle_map(lg, fx.g, f, gf, t);
      const Complex rhs = u.dot(k_t(slice_map(a)) * v);
      CHECK(std::abs(derivative - rhs) <= 1e-6 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST_CASE("right HP solution examples") {
  const Fixture fx = mixed_fixture();
  RandomSource rng(3);
  const StepFunction f = two_interval(fx.g, rng, 0.3, 0.8), gf = two_interval(fx.g, rng, 0.45, 1.0);
  const Matrix x0 = hp_solve(Matrix::Zero(12, 12), fx.g, f, gf, 1.3);
  CHECK((x0 - exponential_inner(f, gf) * identity(kDh)).norm() <= 1e-13);

  const Matrix gmat = rng.matrix(12, 12);
  const StepFunction zero = StepFunction::zero(6);
  const double t = 0.7;
  const Matrix expect = mat_exp(t * slice(gmat, fx.g.omega, fx.g.omega));
  CHECK((hp_solve(gmat, fx.g, zero, zero, t) - expect).norm() <= 1e-12 * expect.norm());
  CHECK_THROWS_AS(hp_solve(gmat, fx.g, zero, zero, -0.1), std::invalid_argument);
}

TEST_CASE("cocycle and right HP solvers agree for multiplication generators") {
  RandomSource rng(4);
  const Fixture fixtures[] = {mixed_fixture(), pure_fixture(), faithful_fixture(5)};
  for (int instance = 0; instance < 20; ++instance) {
    const Fixture& fx = fixtures[instance % 3];
    const Index n = fx.g.particle_dim();
    const LimitGenerator lg = limit_generator_from_f(0.5 * rng.matrix(kDh * n, kDh * n), fx.g, fx.c);
    const StepFunction f = two_interval(fx.g, rng, 0.3, 0.8), gf = two_interval(fx.g, rng, 0.45, 1.0);
    const Matrix a = rng.matrix(kDh, kDh);
    const Vector u = rng.vector(kDh), v = rng.vector(kDh);
    const double t = rng.uniform(0.1, 1.5);
    const Complex cocycle = cocycle_matrix_element(lg, fx.g, a, u, v, f, gf, t);
    const Complex hp = u.dot(a * hp_solve(*lg.g_matrix, fx.g, f, gf, t) * v);
    CHECK(std::abs(cocycle - hp) <= 1e-10 * std::max(1.0, std::abs(hp)));
  }
}

TEST_CASE("HP certification of Hamiltonian limits") {
  const Fixture fx = mixed_fixture();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const HamiltonianSpec spec = random_hamiltonian_spec(fx.c, kDh, seed);
    const HamiltonianLimit hl = f_from_hamiltonian(spec, fx.c);
    const LimitGenerator lg = limit_generator_from_f(hl.f, fx.g, fx.c);
    const HpCheck hp = hp_check(*lg.g_matrix, fx.g);
    CHECK(hp.isometric);
    CHECK(hp.coisometric);
    CHECK(hp.unitary);
    const HpBlockCheck bc = hp_block_check(hl.f, fx.g, fx.c);
    CHECK(bc.unitary);
    CHECK(hp_blocks_residual(hl.blocks, fx.g, fx.c) <= 1e-10);
    CHECK((f_from_blocks(hl.blocks, fx.c, kDh) - hl.f).norm() <= 1e-12);
  }
}

TEST_CASE("HP negative controls") {
  const Fixture fx = mixed_fixture();
  RandomSource rng(6);
  const HamiltonianLimit hl = f_from_hamiltonian(random_hamiltonian_spec(fx.c, kDh, 7), fx.c);

  HpBlocks bad_k = hl.blocks;
  bad_k.k += 0.1 * e0_hermitian(rng, fx.c, kDh);
  const Matrix fk = f_from_blocks(bad_k, fx.c, kDh);
  CHECK_FALSE(hp_check(*limit_generator_from_f(fk, fx.g, fx.c).g_matrix, fx.g).isometric);
  CHECK_FALSE(hp_block_check(fk, fx.g, fx.c).isometric);

  HpBlocks bad_v = hl.blocks;
  bad_v.v *= 1.1;
  const Matrix fv = f_from_blocks(bad_v, fx.c, kDh);
  CHECK_FALSE(hp_check(*limit_generator_from_f(fv, fx.g, fx.c).g_matrix, fx.g).unitary);
  CHECK_FALSE(hp_block_check(fv, fx.g, fx.c).unitary);

  const HpCheck zero = hp_check(Matrix::Zero(12, 12), fx.g);
  CHECK(zero.isometric);
  CHECK(zero.coisometric);
}

TEST_CASE("limit matrix without the multiplicity Hamiltonian") {
  const Fixture fx = mixed_fixture();
  HamiltonianSpec spec = random_hamiltonian_spec(fx.c, kDh, 8);
  spec.h_x.setZero();
  const HamiltonianLimit hl = f_from_hamiltonian(spec, fx.c);
  const SubspaceSplit& sp = fx.c.split;
  const Matrix ho2 = spec.h_o * spec.h_o;
  const Matrix ff = Complex(0.0, -1.0) * (spec.h_d + spec.h_o) - apply_e0(fx.c, 0.5 * ho2 + 0.5 * spec.l.adjoint() * spec.l);
  const Matrix fb = Complex(0.0, -1.0) * spec.l.adjoint();
  const Matrix bf = Complex(0.0, -1.0) * spec.l;
  const Matrix expect = sp.assemble(kDh, ff, fb, bf, Matrix::Zero(spec.h_x.rows(), spec.h_x.cols()));
  CHECK((hl.f - expect).norm() <= 1e-12);
}

TEST_CASE("limit matrix without coupling") {
  const Fixture fx = mixed_fixture();
  HamiltonianSpec spec = random_hamiltonian_spec(fx.c, kDh, 9);
  spec.l.setZero();
  spec.h_o.setZero();
  const HamiltonianLimit hl = f_from_hamiltonian(spec, fx.c);
  const Matrix v = mat_exp(Complex(0.0, -1.0) * spec.h_x);
  const Matrix expect = fx.c.split.assemble(kDh, Complex(0.0, -1.0) * spec.h_d, Matrix(), Matrix(),
                                            v - identity(v.rows()));
  CHECK((hl.f - expect).norm() <= 1e-12);
  CHECK((hl.blocks.v - v).norm() <= 1e-12);
}

TEST_CASE("spec validation") {
  const Fixture fx = mixed_fixture();
  HamiltonianSpec spec = random_hamiltonian_spec(fx.c, kDh, 10);
  HamiltonianSpec nonherm = spec;
  nonherm.h_x(0, 1) += 0.2;
  CHECK_THROWS_AS(validate_spec(nonherm, fx.c), std::invalid_argument);
  HamiltonianSpec diag_ho = spec;
  diag_ho.h_o += identity(diag_ho.h_o.rows());
  CHECK_THROWS_AS(validate_spec(diag_ho, fx.c), std::invalid_argument);
  HamiltonianSpec wrong_shape = spec;
  wrong_shape.l = Matrix::Zero(3, 3);
  CHECK_THROWS_AS(f_from_hamiltonian(wrong_shape, fx.c), std::invalid_argument);
}

TEST_CASE("Evans-Hudson generator of zero") {
  const Fixture fx = mixed_fixture();
  const EhGenerator eh = eh_generator(Matrix::Zero(6, 6), fx.g, fx.c);
  CHECK(eh.psi_limit.matrix().norm() == 0.0);
  CHECK(eh.psi.psi.matrix().norm() == 0.0);
  CHECK(lindblad(eh.psi, fx.g).matrix().norm() == 0.0);
}

TEST_CASE("Evans-Hudson identity for random matrices") {
  RandomSource rng(11);
  for (const Fixture& fx : {mixed_fixture(), pure_fixture(), faithful_fixture(12)}) {
    const Index n = fx.g.particle_dim();
    const EhGenerator eh = eh_generator(rng.matrix(kDh * n, kDh * n), fx.g, fx.c);
    CHECK(eh.ehpsi_residual <= 1e-11);
  }
}

TEST_CASE("Upsilon block formula") {
  const Fixture fx = mixed_fixture();
  RandomSource rng(13);
  const SubspaceSplit& sp = fx.c.split;
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix f = rng.matrix(6, 6);
    const Matrix a = rng.matrix(kDh, kDh);
    const Matrix up = eh_upsilon(f, a, fx.c);
    CHECK((up - eh_upsilon_blocks(f, a, fx.c)).norm() <= 1e-11 * std::max(1.0, up.norm()));
    const Matrix x = sp.front_front(f), z = sp.back_front(f);
    const Matrix xp = apply_e0_perp(fx.c, x);
    const Matrix a0 = kron(a, identity(sp.front_dim())), ax = kron(a, identity(sp.back_dim()));
    const Matrix expect = apply_e0(fx.c, xp.adjoint() * a0 * xp + z.adjoint() * ax * z);
    CHECK((sp.front_front(up) - expect).norm() <= 1e-11 * std::max(1.0, expect.norm()));
  }
}

TEST_CASE("Evans-Hudson generators of Hamiltonian limits are unital") {
  const Fixture fx = mixed_fixture();
  for (std::uint64_t seed : {14u, 15u}) {
    const HamiltonianLimit hl = f_from_hamiltonian(random_hamiltonian_spec(fx.c, kDh, seed), fx.c);
    const EhGenerator eh = eh_generator(hl.f, fx.g, fx.c);
    CHECK(eh.psi.psi(identity(kDh)).norm() <= 1e-11);
    const Superoperator l = lindblad(eh.psi, fx.g);
    CHECK(l(identity(kDh)).norm() <= 1e-11);
    CHECK(superop_distance(l, lindblad_closed_form(hl.blocks, fx.g, kDh)) <= 1e-10);
    for (double t : {0.1, 1.0}) CHECK(min_hermitian_eigenvalue(choi_matrix(superop_exp(l, t))) >= -1e-8);
  }
}

TEST_CASE("weak unitarity transfer") {
  RandomSource rng(16);
  for (const Fixture& fx : {mixed_fixture(), pure_fixture()}) {
    const HamiltonianLimit hl = f_from_hamiltonian(random_hamiltonian_spec(fx.c, kDh, 17), fx.c);
    const LimitGenerator hp = limit_generator_from_f(hl.f, fx.g, fx.c);
    REQUIRE(hp_check(*hp.g_matrix, fx.g).unitary);
    const StepFunction zero = StepFunction::zero(fx.g.khat_dim());
    Vector u = rng.vector(kDh);
    u.normalize();
    for (double t : {0.1, 0.5, 1.0, 3.0}) {
      const Matrix x = hp_solve(*hp.g_matrix, fx.g, zero, zero, t);
      CHECK(std::abs(u.dot(x * u)) <= 1.0 + 1e-9);
    }
    const EhGenerator eh = eh_generator(hl.f, fx.g, fx.c);
    const StepFunction f = two_interval(fx.g, rng, 0.3, 0.8), gf = two_interval(fx.g, rng, 0.45, 1.0);
    const Vector v = rng.vector(kDh);
    for (double t : {0.5, 1.2}) {
      const Complex got = cocycle_matrix_element(eh.psi, fx.g, identity(kDh), u, v, f, gf, t);
      CHECK(std::abs(got - u.dot(v) * exponential_inner(f, gf)) <= 1e-10);
    }
  }
}

TEST_CASE("generator convergence for Hamiltonian walks") {
  const std::vector<double> taus{0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625, 0.001953125};
  const Fixture fx = mixed_fixture();
  for (bool perturbed : {false, true}) {
    const HamiltonianSpec spec = random_hamiltonian_spec(fx.c, kDh, 18, perturbed);
    HamiltonianSpec bare = spec;
    bare.r00 = Matrix();
    bare.r0x = Matrix();
    bare.rxx = Matrix();
    for (GeneratorKind kind : {GeneratorKind::RightMultiplication, GeneratorKind::Conjugation}) {
      // the perturbation family does not move the limit
      const Superoperator psi = hamiltonian_limit_psi(bare, fx.g, fx.c, kind);
      const std::vector<double> d = generator_convergence(spec, kind, psi, taus, fx.c);
      for (std::size_t i = 1; i < d.size(); ++i) CHECK(d[i] < d[i - 1]);
      CHECK(loglog_slope(taus, d) >= 0.4);
    }
  }
}

TEST_CASE("log-log slope") {
  const std::vector<double> taus{1.0, 0.5, 0.25};
  CHECK(std::abs(loglog_slope(taus, {1.0, 0.5, 0.25}) - 1.0) <= 1e-12);
  CHECK(std::abs(loglog_slope(taus, {4.0, 2.0 * std::sqrt(2.0), 2.0}) - 0.5) <= 1e-12);
  CHECK(loglog_slope(taus, {0.0, 0.0, 0.0}) == 0.0);
}
