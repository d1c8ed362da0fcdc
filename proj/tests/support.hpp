// Fixtures shared by the unit tests.
#pragma once

#include <cmath>
#include <vector>

#include "qrwt/cocycle.hpp"
#include "qrwt/cond_exp.hpp"
#include "qrwt/presets.hpp"
#include "qrwt/random.hpp"
#include "qrwt/state_gns.hpp"

namespace qrwt::testing {

inline Matrix diag3(double a, double b, double c) {
  Matrix rho = Matrix::Zero(3, 3);
  rho(0, 0) = a;
  rho(1, 1) = b;
  rho(2, 2) = c;
  return rho;
}

inline Matrix elementary(Index n, Index i, Index j) {
  Matrix e = Matrix::Zero(n, n);
  e(i, j) = 1.0;
  return e;
}

inline Vector unit(Index n, Index i) {
  Vector e = Vector::Zero(n);
  e(i) = 1.0;
  return e;
}

/// Random map B(C^din) -> B(C^dout) given by a dense random matrix.
inline Superoperator random_superop(RandomSource& rng, Index din, Index dout) {
  return Superoperator(OperatorShape::square(din), OperatorShape::square(dout),
                       rng.matrix(dout * dout, din * din));
}

/// Random vector of khat with no Omega component.
inline Vector random_noise(RandomSource& rng, const GnsData& g, double scale = 1.0) {
  return from_mu_coordinates(g, scale * rng.vector(g.khat_dim() - 1));
}

/// Random X in ker rho: X = Y - tr(rho Y) I.
inline Matrix random_kernel_element(RandomSource& rng, const GnsData& g) {
  const Index n = g.particle_dim();
  const Matrix y = rng.matrix(n, n);
  return y - state_value(g, y) * identity(n);
}

struct Fixture {
  GnsData g;
  CondExp c;
};

/// rho = diag(0.7, 0.3, 0) with the diagonal pinching.
inline Fixture mixed_fixture() {
  Fixture f;
  f.g = build_gns(diag3(0.7, 0.3, 0.0));
  f.c = build_cond_exp(f.g, singleton_blocks(2));
  return f;
}

/// rho = e1 e1* in C^3.
inline Fixture pure_fixture() {
  Fixture f;
  f.g = build_gns(diag3(1.0, 0.0, 0.0));
  f.c = build_cond_exp(f.g, single_block(1));
  return f;
}

/// A random faithful state on C^3 with a non-diagonal eigenbasis.
inline Fixture faithful_fixture(std::uint64_t seed) {
  RandomSource rng(seed);
  Fixture f;
  f.g = build_gns(rng.density(3));
  f.c = build_cond_exp(f.g, singleton_blocks(3));
  return f;
}

}  // namespace qrwt::testing
