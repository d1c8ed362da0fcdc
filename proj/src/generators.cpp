#include "qrwt/generators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "qrwt/random.hpp"

namespace qrwt {

namespace {

constexpr double kMultiplicationTol = 1e-11;
constexpr double kNoiseThreshold = 1e-9;

void require_positive_tau(double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
}

Index particle_dim_of(const Matrix& factor, Index system_dim) {
  if (system_dim <= 0 || factor.rows() % system_dim != 0)
    throw std::invalid_argument("generator matrix dimension is not a multiple of dim h");
  return factor.rows() / system_dim;
}

Index system_dim_of(const Matrix& t, Index inner) {
  if (t.rows() != t.cols() || inner <= 0 || t.rows() % inner != 0)
    throw std::invalid_argument("operator dimension is incompatible with the particle space");
  return t.rows() / inner;
}

}  // namespace

const char* to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::RawMatrix:
      return "raw";
    case GeneratorKind::RightMultiplication:
      return "right-multiplication";
    case GeneratorKind::Conjugation:
      return "conjugation";
    case GeneratorKind::Explicit:
      return "explicit";
  }
  return "unknown";
}

WalkGenerator WalkGenerator::raw_matrix(const Matrix& f, Index system_dim) {
  require_square(f, "generator matrix");
  WalkGenerator w;
  w.kind = GeneratorKind::RawMatrix;
  w.system_dim = system_dim;
  w.particle_dim = particle_dim_of(f, system_dim);
  w.factor = f;
  const Matrix id_k = identity(w.particle_dim);
  w.phi = Superoperator::from_map(OperatorShape::square(system_dim),
                                  OperatorShape::square(f.rows()),
                                  [&](const Matrix& a) -> Matrix { return kron(a, id_k) * f; });
  return w;
}

WalkGenerator WalkGenerator::right_multiplication(const Matrix& u, Index system_dim) {
  WalkGenerator w = raw_matrix(u, system_dim);
  w.kind = GeneratorKind::RightMultiplication;
  return w;
}

WalkGenerator WalkGenerator::conjugation(const Matrix& u, Index system_dim) {
  require_square(u, "step operator");
  WalkGenerator w;
  w.kind = GeneratorKind::Conjugation;
  w.system_dim = system_dim;
  w.particle_dim = particle_dim_of(u, system_dim);
  w.factor = u;
  const Matrix id_k = identity(w.particle_dim);
  const Matrix u_adj = u.adjoint();
  w.phi = Superoperator::from_map(
      OperatorShape::square(system_dim), OperatorShape::square(u.rows()),
      [&](const Matrix& a) -> Matrix { return u_adj * kron(a, id_k) * u; });
  return w;
}

WalkGenerator WalkGenerator::from_superop(Superoperator phi, Index particle_dim) {
  const OperatorShape in = phi.in_shape();
  const OperatorShape out = phi.out_shape();
  if (in.rows != in.cols || out.rows != out.cols || out.rows != in.rows * particle_dim)
    throw std::invalid_argument("generator superoperator must map B(h) into B(h (x) k)");
  WalkGenerator w;
  w.kind = GeneratorKind::Explicit;
  w.system_dim = in.rows;
  w.particle_dim = particle_dim;
  w.phi = std::move(phi);
  return w;
}

Matrix modification_map(const Matrix& t, double tau, const CondExp& c) {
  require_positive_tau(tau);
  const Index dh = system_dim_of(t, c.split.total_dim());
  const Matrix p0 = support_projector(c, dh);
  const Matrix pk = kernel_projector(c, dh);
  const Matrix e = apply_e(c, t);
  const double s = 1.0 / std::sqrt(tau);
  return p0 * (e / tau + (t - e) * s) * p0 + s * (p0 * t * pk + pk * t * p0) + pk * t * pk;
}

Matrix demodification_map(const Matrix& s, double tau, const CondExp& c) {
  require_positive_tau(tau);
  const Index dh = system_dim_of(s, c.split.total_dim());
  const Matrix p0 = support_projector(c, dh);
  const Matrix pk = kernel_projector(c, dh);
  const Matrix e = apply_e(c, s);
  const double r = std::sqrt(tau);
  return tau * e + r * (p0 * s * p0 - e) + r * (p0 * s * pk + pk * s * p0) + pk * s * pk;
}

Superoperator modify(const WalkGenerator& w, double tau, const CondExp& c) {
  require_positive_tau(tau);
  if (w.particle_dim != c.split.total_dim())
    throw std::invalid_argument("modify: generator and conditional expectation disagree on dim k");
  const Matrix id_k = identity(w.particle_dim);
  return Superoperator::from_map(w.phi.in_shape(), w.phi.out_shape(),
                                 [&](const Matrix& a) -> Matrix {
                                   return modification_map(w.phi(a) - kron(a, id_k), tau, c);
                                 });
}

Superoperator modify_vacuum(const Superoperator& phi_hat, double tau, const GnsData& g) {
  require_positive_tau(tau);
  const Index dh = phi_hat.in_shape().rows;
  if (phi_hat.out_shape() != OperatorShape::square(dh * g.khat_dim()))
    throw std::invalid_argument("modify_vacuum: map must take values in B(h (x) khat)");
  const Matrix vac = vacuum_projector(g, dh);
  const Matrix scale = vac / std::sqrt(tau) + (identity(vac.rows()) - vac);
  const Matrix id_khat = identity(g.khat_dim());
  return Superoperator::from_map(phi_hat.in_shape(), phi_hat.out_shape(),
                                 [&](const Matrix& a) -> Matrix {
                                   return scale * (phi_hat(a) - kron(a, id_khat)) * scale;
                                 });
}

double check_cruc(const WalkGenerator& w, double tau, const CondExp& c) {
  require_positive_tau(tau);
  const Index dh = w.system_dim;
  const Matrix pk = kernel_projector(c, dh);
  const Matrix id_k = identity(w.particle_dim);
  const double r = std::sqrt(tau);
  double worst = 0.0;
  for (Index q = 0; q < dh; ++q) {
    for (Index p = 0; p < dh; ++p) {
      Matrix a = Matrix::Zero(dh, dh);
      a(p, q) = 1.0;
      const Matrix prime = w.phi(a) - kron(a, id_k);
      const Matrix f = modification_map(prime, tau, c);
      const Matrix ef = apply_e(c, f);
      const Matrix lhs = tau * ef + r * (f - ef);
      const Matrix rhs = prime + (r - 1.0) * pk * prime * pk;
      worst = std::max(worst, (lhs - rhs).norm());
    }
  }
  return worst;
}

Matrix lift_limit_value(const Matrix& t, const GnsData& g, const CondExp& c) {
  const Index dh = system_dim_of(t, g.particle_dim());
  const Matrix vac = vacuum_projector(g, dh);
  const Matrix noise = identity(vac.rows()) - vac;
  const Matrix pk = kernel_projector(c, dh);
  const Matrix whole = ampliate_pi(g, t);
  const Matrix perp = ampliate_pi(g, apply_e_perp(c, t));
  const Matrix corner = ampliate_pi(g, pk * t * pk);
  return vac * whole * vac + vac * perp * noise + noise * perp * vac + noise * corner * noise;
}

LimitGenerator limit_generator(const Superoperator& psi_limit, const GnsData& g,
                               const CondExp& c) {
  const Index dh = psi_limit.in_shape().rows;
  if (psi_limit.in_shape() != OperatorShape::square(dh) ||
      psi_limit.out_shape() != OperatorShape::square(dh * g.particle_dim()))
    throw std::invalid_argument("limit_generator: Psi must map B(h) into B(h (x) k)");
  LimitGenerator lg;
  lg.psi = Superoperator::from_map(
      psi_limit.in_shape(), OperatorShape::square(dh * g.khat_dim()),
      [&](const Matrix& a) -> Matrix { return lift_limit_value(psi_limit(a), g, c); });
  return lg;
}

LimitGenerator limit_generator_from_f(const Matrix& f, const GnsData& g, const CondExp& c) {
  require_square(f, "F");
  const Index dh = system_dim_of(f, g.particle_dim());
  const Matrix id_k = identity(g.particle_dim());
  const Superoperator psi_limit = Superoperator::from_map(
      OperatorShape::square(dh), OperatorShape::square(f.rows()),
      [&](const Matrix& a) -> Matrix { return kron(a, id_k) * f; });
  LimitGenerator lg = limit_generator(psi_limit, g, c);
  const Matrix gm = lift_limit_value(f, g, c);
  const Matrix id_khat = identity(g.khat_dim());
  double worst = 0.0;
  for (Index q = 0; q < dh; ++q) {
    for (Index p = 0; p < dh; ++p) {
      Matrix a = Matrix::Zero(dh, dh);
      a(p, q) = 1.0;
      worst = std::max(worst, (lg.psi(a) - kron(a, id_khat) * gm).norm());
    }
  }
  if (worst > kMultiplicationTol * std::max(1.0, gm.norm()))
    throw std::logic_error("limit_generator_from_f: psi is not of multiplication form");
  lg.g_matrix = gm;
  lg.multiplication_residual = worst;
  return lg;
}

Superoperator ampliate_generator(const WalkGenerator& w, const GnsData& g) {
  return Superoperator::from_map(
      w.phi.in_shape(), OperatorShape::square(w.system_dim * g.khat_dim()),
      [&](const Matrix& a) -> Matrix { return ampliate_pi(g, w.phi(a)); });
}

WalkGenerator exact_scaling_generator(const Superoperator& psi_limit, double tau,
                                      const CondExp& c) {
  require_positive_tau(tau);
  const Index dh = psi_limit.in_shape().rows;
  const Index n = c.split.total_dim();
  const Matrix id_k = identity(n);
  Superoperator phi = Superoperator::from_map(
      psi_limit.in_shape(), OperatorShape::square(dh * n), [&](const Matrix& a) -> Matrix {
        return kron(a, id_k) + demodification_map(psi_limit(a), tau, c);
      });
  return WalkGenerator::from_superop(std::move(phi), n);
}

WalkGenerator exact_scaling_generator(const Matrix& f, double tau, const CondExp& c) {
  require_square(f, "F");
  const Index dh = system_dim_of(f, c.split.total_dim());
  return WalkGenerator::raw_matrix(identity(f.rows()) + demodification_map(f, tau, c), dh);
}

double SliceIdentityReport::max() const {
  return std::max({vacuum, annihilation, creation, gauge});
}

SliceIdentityReport check_slice_identities(const Superoperator& psi_limit,
                                           const LimitGenerator& lg, const GnsData& g,
                                           const CondExp& c, int trials, std::uint64_t seed) {
  const Index dh = lg.system_dim();
  const Index n = g.particle_dim();
  const Matrix kernel = identity(n) - g.p0;
  RandomSource rng(seed);
  auto centred = [&]() -> Matrix {
    const Matrix x = rng.matrix(n, n);
    return x - state_value(g, x) * identity(n);
  };
  SliceIdentityReport out;
  for (int trial = 0; trial < trials; ++trial) {
    const Matrix a = rng.matrix(dh, dh);
    const Matrix x = centred();
    const Matrix y = centred();
    const Matrix big = psi_limit(a);
    const Matrix amp = ampliate_pi(g, big);
    const Matrix value = lg.psi(a);
    const Vector& om = g.omega;
    const Vector bx = bracket(g, x);
    const Vector by = bracket(g, y);
    const Vector dx = bracket(g, x - c.d(x));
    const Vector dy = bracket(g, y - c.d(y));
    const Vector kx = bracket(g, kernel * x);
    const Vector ky = bracket(g, kernel * y);
    const Matrix vac = slice(value, om, om);
    out.vacuum = std::max({out.vacuum, (vac - slice(amp, om, om)).norm(),
                           (vac - slice_state(g, big)).norm()});
    out.annihilation = std::max(out.annihilation, (slice(value, om, by) - slice(amp, om, dy)).norm());
    out.creation = std::max(out.creation, (slice(value, bx, om) - slice(amp, dx, om)).norm());
    out.gauge = std::max(out.gauge, (slice(value, bx, by) - slice(amp, kx, ky)).norm());
  }
  return out;
}

long long noise_bound(long long n, long long k, long long l) {
  if (n < 1) throw std::invalid_argument("noise_bound: N must be positive");
  if (k < 1 || k > n) throw std::invalid_argument("noise_bound: k must lie in 1..N");
  if (l < 1 || l > k * k) throw std::invalid_argument("noise_bound: l must lie in 1..k^2");
  return 2 * (n * k - l) + (n - k) * (n - k) * k * k;
}

NoiseCount effective_noise_count(const LimitGenerator& lg, const GnsData& g, int trials,
                                 std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("effective_noise_count: trials must be positive");
  const Index dh = lg.system_dim();
  const Index m = g.mu_basis.cols();
  std::vector<char> creation(m, 0), annihilation(m, 0), gauge(m * m, 0);
  RandomSource rng(seed);
  for (int trial = 0; trial < trials; ++trial) {
    const Matrix value = lg.psi(rng.matrix(dh, dh));
    const double cutoff = kNoiseThreshold * value.norm();
    if (value.norm() == 0.0) continue;
    for (Index i = 0; i < m; ++i) {
      const Vector mu_i = g.mu_basis.col(i);
      if (slice(value, mu_i, g.omega).norm() > cutoff) creation[i] = 1;
      if (slice(value, g.omega, mu_i).norm() > cutoff) annihilation[i] = 1;
      for (Index j = 0; j < m; ++j)
        if (slice(value, mu_i, g.mu_basis.col(j)).norm() > cutoff) gauge[i * m + j] = 1;
    }
  }
  NoiseCount count;
  count.creation = static_cast<int>(std::count(creation.begin(), creation.end(), 1));
  count.annihilation = static_cast<int>(std::count(annihilation.begin(), annihilation.end(), 1));
  count.gauge = static_cast<int>(std::count(gauge.begin(), gauge.end(), 1));
  return count;
}

}  // namespace qrwt
