#include "qrwt/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qrwt {

namespace {

constexpr double kStructureTol = 1e-12;
constexpr double kHpTol = 1e-10;
constexpr double kEhTol = 1e-9;

Matrix block_or_zero(const Matrix& m, Index rows, Index cols, const char* name) {
  if (m.size() == 0) return Matrix::Zero(rows, cols);
  if (m.rows() != rows || m.cols() != cols)
    throw std::invalid_argument(std::string("hamiltonian: block ") + name + " should be " +
                                std::to_string(rows) + "x" + std::to_string(cols));
  return m;
}

struct FullSpec {
  Matrix h_d, h_o, l, h_x, r00, r0x, rxx;
};

FullSpec expand(const HamiltonianSpec& spec, const CondExp& c) {
  const Index dh = spec.system_dim;
  if (dh <= 0) throw std::invalid_argument("hamiltonian: system_dim must be positive");
  const Index s = dh * c.split.front_dim();
  const Index x = dh * c.split.back_dim();
  FullSpec out;
  out.h_d = block_or_zero(spec.h_d, s, s, "h_d");
  out.h_o = block_or_zero(spec.h_o, s, s, "h_o");
  out.l = block_or_zero(spec.l, x, s, "l");
  out.h_x = block_or_zero(spec.h_x, x, x, "h_x");
  out.r00 = block_or_zero(spec.r00, s, s, "r00");
  out.r0x = block_or_zero(spec.r0x, x, s, "r0x");
  out.rxx = block_or_zero(spec.rxx, x, x, "rxx");
  return out;
}

Matrix kernel_part(const Matrix& a, const CondExp& c) {
  return kron(a, identity(c.split.back_dim()));
}

Matrix support_part(const Matrix& a, const CondExp& c) {
  return kron(a, identity(c.split.front_dim()));
}

Index system_dim_for(const Matrix& t, Index inner) {
  if (t.rows() != t.cols() || inner <= 0 || t.rows() % inner != 0)
    throw std::invalid_argument("operator dimension is incompatible with the particle space");
  return t.rows() / inner;
}

Matrix eh_psi_value(const Matrix& f, const Matrix& a, const CondExp& c) {
  const Index n = c.split.total_dim();
  const Index dh = system_dim_for(f, n);
  const Matrix amp = kron(a, identity(n));
  const Matrix p0 = support_projector(c, dh);
  const Matrix pk = kernel_projector(c, dh);
  const Matrix fp = apply_e_perp(c, f);
  const Matrix quad = f.adjoint() * pk * amp * pk * f;
  return amp * f + f.adjoint() * amp + apply_e(c, fp.adjoint() * amp * fp) + quad -
         p0 * quad * p0;
}

std::vector<std::pair<double, double>> intervals(const StepFunction& f, const StepFunction& g,
                                                 double t) {
  const std::vector<double> points = merged_breakpoints(f, g, t);
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) out.emplace_back(points[i], points[i + 1]);
  return out;
}

}  // namespace

void validate_spec(const HamiltonianSpec& spec, const CondExp& c) {
  const FullSpec s = expand(spec, c);
  require_hermitian(s.h_d, "hamiltonian block h_d");
  require_hermitian(s.h_o, "hamiltonian block h_o");
  require_hermitian(s.h_x, "hamiltonian block h_x");
  require_hermitian(s.r00, "hamiltonian block r00");
  require_hermitian(s.rxx, "hamiltonian block rxx");
  if ((apply_e0(c, s.h_d) - s.h_d).norm() > kStructureTol * std::max(1.0, s.h_d.norm()))
    throw std::invalid_argument("hamiltonian block h_d must be fixed by the conditional expectation");
  if (apply_e0(c, s.h_o).norm() > kStructureTol * std::max(1.0, s.h_o.norm()))
    throw std::invalid_argument("hamiltonian block h_o must be annihilated by the conditional expectation");
}

Matrix total_hamiltonian(const HamiltonianSpec& spec, double tau, const CondExp& c) {
  if (!(tau > 0.0)) throw std::invalid_argument("total_hamiltonian: tau must be positive");
  const FullSpec s = expand(spec, c);
  const double r = std::sqrt(tau);
  const Matrix ff = s.h_d + s.h_o / r + r * s.r00;
  const Matrix bf = (s.l + r * s.r0x) / r;
  const Matrix bb = (s.h_x + r * s.rxx) / tau;
  return c.split.assemble(spec.system_dim, ff, bf.adjoint(), bf, bb);
}

Matrix step_unitary(const HamiltonianSpec& spec, double tau, const CondExp& c) {
  return mat_exp(Complex(0.0, -tau) * total_hamiltonian(spec, tau, c));
}

WalkGenerator hamiltonian_walk(const HamiltonianSpec& spec, double tau, const CondExp& c,
                               GeneratorKind kind) {
  const Matrix u = step_unitary(spec, tau, c);
  switch (kind) {
    case GeneratorKind::RightMultiplication:
      return WalkGenerator::right_multiplication(u, spec.system_dim);
    case GeneratorKind::Conjugation:
      return WalkGenerator::conjugation(u, spec.system_dim);
    default:
      throw std::invalid_argument("hamiltonian_walk: kind must be right-multiplication or conjugation");
  }
}

HamiltonianLimit f_from_hamiltonian(const HamiltonianSpec& spec, const CondExp& c) {
  validate_spec(spec, c);
  const FullSpec s = expand(spec, c);
  const Matrix e1 = decap_exp(1, s.h_x, -kI);
  const Matrix e2m = decap_exp(2, s.h_x, -kI);
  const Matrix e2p = decap_exp(2, s.h_x, kI);
  const Matrix v = exp_hermitian(s.h_x, -kI);
  const Matrix l_adj = s.l.adjoint();

  HamiltonianLimit out;
  const Matrix ff = -kI * (s.h_d + s.h_o) - apply_e0(c, 0.5 * s.h_o * s.h_o + l_adj * e2m * s.l);
  const Matrix fb = -kI * l_adj * e1;
  const Matrix bf = -kI * e1 * s.l;
  const Matrix bb = v - identity(v.rows());
  out.f = c.split.assemble(spec.system_dim, ff, fb, bf, bb);

  out.blocks.h_d = s.h_d - 0.5 * kI * apply_e0(c, l_adj * (e2m - e2p) * s.l);
  out.blocks.h_o = s.h_o;
  out.blocks.k = apply_e0(c, s.h_o * s.h_o + l_adj * (e2m + e2p) * s.l);
  out.blocks.d = bf;
  out.blocks.v = v;
  return out;
}

Matrix f_from_blocks(const HpBlocks& b, const CondExp& c, Index system_dim) {
  const Matrix ff = -kI * (b.h_d + b.h_o) - 0.5 * b.k;
  const Matrix fb = -b.d.adjoint() * b.v;
  const Matrix bb = b.v - identity(b.v.rows());
  return c.split.assemble(system_dim, ff, fb, b.d, bb);
}

HpCheck hp_check(const Matrix& g_matrix, const GnsData& g) {
  const Index dh = system_dim_for(g_matrix, g.khat_dim());
  const Matrix noise = noise_projector(g, dh);
  const Matrix sym = g_matrix + g_matrix.adjoint();
  HpCheck out;
  out.isometry_residual = (sym + g_matrix.adjoint() * noise * g_matrix).norm();
  out.coisometry_residual = (sym + g_matrix * noise * g_matrix.adjoint()).norm();
  out.isometric = out.isometry_residual <= kHpTol;
  out.coisometric = out.coisometry_residual <= kHpTol;
  out.unitary = out.isometric && out.coisometric;
  return out;
}

HpBlockCheck hp_block_check(const Matrix& f, const GnsData& g, const CondExp& c) {
  const Index dh = system_dim_for(f, g.particle_dim());
  HpBlockCheck out;

  const Matrix f00 = c.split.front_front(f);
  const Matrix a = apply_e0(c, f00);
  const Matrix b = f00 - a;
  const Matrix cc = c.split.front_back(f);
  const Matrix d = c.split.back_front(f);
  const Matrix e = c.split.back_back(f);
  const Matrix v = e + identity(e.rows());
  out.b_skew = (b + b.adjoint()).norm();
  out.c_condition = (cc + d.adjoint() * v).norm();
  out.state_condition =
      (slice_state0(g, a + a.adjoint()) + slice_state0(g, b.adjoint() * b + d.adjoint() * d)).norm();
  out.v_isometry = (e + e.adjoint() + e.adjoint() * e).norm();
  out.v_coisometry = (v * v.adjoint() - identity(v.rows())).norm();

  const Matrix p0 = support_projector(c, dh);
  const Matrix pk = kernel_projector(c, dh);
  const Matrix fs = f + f.adjoint();
  const Matrix f1 = apply_e(c, fs + apply_e_perp(c, f.adjoint()) * apply_e_perp(c, f));
  const Matrix f2 = p0 * (apply_e_perp(c, fs) + apply_e_perp(c, f.adjoint()) * pk * f * pk);
  const Matrix f3 = pk * (fs + f.adjoint() * pk * f) * pk;
  const Matrix vac = vacuum_projector(g, dh);
  const Matrix noise = identity(vac.rows()) - vac;
  const Matrix t1 = vac * ampliate_pi(g, f1) * vac;
  const Matrix t2 = vac * ampliate_pi(g, f2) * noise;
  const Matrix t3 = noise * ampliate_pi(g, f3) * noise;
  out.f1 = t1.norm();
  out.f2 = t2.norm();
  out.f3 = t3.norm();
  const Matrix gm = lift_limit_value(f, g, c);
  const Matrix lhs = gm + gm.adjoint() + gm.adjoint() * noise * gm;
  out.decomposition = (lhs - (t1 + t2 + t2.adjoint() + t3)).norm();

  const bool common = out.b_skew <= kHpTol && out.c_condition <= kHpTol &&
                      out.state_condition <= kHpTol;
  out.isometric = common && out.v_isometry <= kHpTol;
  out.coisometric = common && out.v_coisometry <= kHpTol;
  out.unitary = out.isometric && out.coisometric;
  return out;
}

double hp_blocks_residual(const HpBlocks& b, const GnsData& g, const CondExp& c) {
  const Matrix v_id = identity(b.v.rows());
  const Matrix dd = b.d.adjoint() * b.d;
  return std::max({(b.h_d - b.h_d.adjoint()).norm(), (b.h_o - b.h_o.adjoint()).norm(),
                   (apply_e0(c, b.h_d) - b.h_d).norm(), apply_e0(c, b.h_o).norm(),
                   (b.k - b.k.adjoint()).norm(), (apply_e0(c, b.k) - b.k).norm(),
                   slice_state0(g, b.k - b.h_o * b.h_o - dd).norm(),
                   (b.v.adjoint() * b.v - v_id).norm(), (b.v * b.v.adjoint() - v_id).norm()});
}

Superoperator cocycle_slice_map(const LimitGenerator& lg, const GnsData& g, const Vector& x,
                                const Vector& y) {
  const Vector xh = hat(g, x);
  const Vector yh = hat(g, y);
  return Superoperator::from_map(lg.psi.in_shape(), lg.psi.in_shape(),
                                 [&](const Matrix& a) { return slice(lg.psi(a), xh, yh); });
}

CocycleSolver::CocycleSolver(const LimitGenerator& lg, const GnsData& g)
    : table_(lg.psi, g.khat_dim()), omega_(g.omega) {}

Superoperator CocycleSolver::map(const StepFunction& f, const StepFunction& gfun,
                                 double t) const {
  if (t < 0.0) throw std::invalid_argument("cocycle: t must be non-negative");
  if (f.dim != omega_.size() || gfun.dim != omega_.size())
    throw std::invalid_argument("cocycle: step function dimension");
  const Index dh = table_.system_dim();
  Matrix m = identity(dh * dh);
  for (const auto& [s0, s1] : intervals(f, gfun, t)) {
    const double mid = 0.5 * (s0 + s1);
    const Matrix gen = table_.combine(omega_ + f.value_at(mid), omega_ + gfun.value_at(mid));
    m = m * mat_exp((s1 - s0) * gen);
  }
  m *= exponential_inner(f, gfun);
  return Superoperator(OperatorShape::square(dh), OperatorShape::square(dh), m);
}

Complex CocycleSolver::matrix_element(const Matrix& a, const Vector& u, const Vector& v,
                                      const StepFunction& f, const StepFunction& gfun,
                                      double t) const {
  const Matrix kt = map(f, gfun, t)(a);
  return u.dot(kt * v);
}

Superoperator cocycle_map(const LimitGenerator& lg, const GnsData& g, const StepFunction& f,
                          const StepFunction& gfun, double t) {
  return CocycleSolver(lg, g).map(f, gfun, t);
}

Complex cocycle_matrix_element(const LimitGenerator& lg, const GnsData& g, const Matrix& a,
                               const Vector& u, const Vector& v, const StepFunction& f,
                               const StepFunction& gfun, double t) {
  return CocycleSolver(lg, g).matrix_element(a, u, v, f, gfun, t);
}

Matrix hp_solve(const Matrix& g_matrix, const GnsData& g, const StepFunction& f,
                const StepFunction& gfun, double t) {
  if (t < 0.0) throw std::invalid_argument("hp_solve: t must be non-negative");
  const Index dh = system_dim_for(g_matrix, g.khat_dim());
  Matrix x = identity(dh);
  for (const auto& [s0, s1] : intervals(f, gfun, t)) {
    const double mid = 0.5 * (s0 + s1);
    const Matrix slice_g = slice(g_matrix, hat(g, f.value_at(mid)), hat(g, gfun.value_at(mid)));
    x = mat_exp((s1 - s0) * slice_g) * x;
  }
  return exponential_inner(f, gfun) * x;
}

EhGenerator eh_generator(const Matrix& f, const GnsData& g, const CondExp& c) {
  require_square(f, "F");
  const Index dh = system_dim_for(f, g.particle_dim());
  EhGenerator out;
  out.psi_limit = Superoperator::from_map(OperatorShape::square(dh), OperatorShape::square(f.rows()),
                                          [&](const Matrix& a) { return eh_psi_value(f, a, c); });
  out.psi = limit_generator(out.psi_limit, g, c);
  out.g_matrix = lift_limit_value(f, g, c);

  const Matrix& gm = out.g_matrix;
  const Matrix noise = noise_projector(g, dh);
  const Matrix id_khat = identity(g.khat_dim());
  for (Index q = 0; q < dh; ++q)
    for (Index p = 0; p < dh; ++p) {
      Matrix a = Matrix::Zero(dh, dh);
      a(p, q) = 1.0;
      const Matrix amp = kron(a, id_khat);
      const Matrix expected = amp * gm + gm.adjoint() * amp + gm.adjoint() * noise * amp * noise * gm;
      out.ehpsi_residual = std::max(out.ehpsi_residual, (out.psi.psi(a) - expected).norm());
    }
  if (out.ehpsi_residual > kEhTol * std::max(1.0, gm.squaredNorm()))
    throw std::logic_error("eh_generator: psi does not have Evans-Hudson form");
  return out;
}

Matrix eh_upsilon(const Matrix& f, const Matrix& a, const CondExp& c) {
  const Index n = c.split.total_dim();
  const Index dh = system_dim_for(f, n);
  const Matrix amp = kron(a, identity(n));
  const Matrix p0 = support_projector(c, dh);
  const Matrix pk = kernel_projector(c, dh);
  const Matrix fp = apply_e_perp(c, f);
  const Matrix quad = f.adjoint() * pk * amp * pk * f;
  return apply_e(c, fp.adjoint() * amp * fp) + quad - p0 * quad * p0;
}

Matrix eh_upsilon_blocks(const Matrix& f, const Matrix& a, const CondExp& c) {
  const Index dh = system_dim_for(f, c.split.total_dim());
  const Matrix x = c.split.front_front(f);
  const Matrix z = c.split.back_front(f);
  const Matrix w = c.split.back_back(f);
  const Matrix a0 = support_part(a, c);
  const Matrix ax = kernel_part(a, c);
  const Matrix xp = apply_e0_perp(c, x);
  const Matrix ff = apply_e0(c, xp.adjoint() * a0 * xp + z.adjoint() * ax * z);
  return c.split.assemble(dh, ff, z.adjoint() * ax * w, w.adjoint() * ax * z,
                          w.adjoint() * ax * w);
}

Superoperator lindblad(const LimitGenerator& lg, const GnsData& g) {
  return Superoperator::from_map(lg.psi.in_shape(), lg.psi.in_shape(), [&](const Matrix& a) {
    return slice(lg.psi(a), g.omega, g.omega);
  });
}

Superoperator lindblad_closed_form(const HpBlocks& b, const GnsData& g, Index system_dim) {
  const Matrix hd = slice_state0(g, b.h_d);
  const Matrix dd = slice_state0(g, b.d.adjoint() * b.d);
  const Matrix oo = slice_state0(g, b.h_o * b.h_o);
  const Index r = g.support_dim();
  const Index x = g.particle_dim() - r;
  return Superoperator::from_map(
      OperatorShape::square(system_dim), OperatorShape::square(system_dim),
      [&](const Matrix& a) -> Matrix {
        const Matrix jump = slice_state0(g, b.d.adjoint() * kron(a, identity(x)) * b.d);
        const Matrix off = slice_state0(g, b.h_o * kron(a, identity(r)) * b.h_o);
        return -kI * (a * hd - hd * a) - 0.5 * (a * dd + dd * a) + jump -
               0.5 * (a * oo + oo * a) + off;
      });
}

Superoperator hamiltonian_limit_psi(const HamiltonianSpec& spec, const GnsData& g,
                                    const CondExp& c, GeneratorKind kind) {
  const Matrix f = f_from_hamiltonian(spec, c).f;
  const Index dh = spec.system_dim;
  const Index n = g.particle_dim();
  const auto in = OperatorShape::square(dh);
  const auto out = OperatorShape::square(dh * n);
  switch (kind) {
    case GeneratorKind::RightMultiplication:
      return Superoperator::from_map(in, out, [&](const Matrix& a) -> Matrix {
        return kron(a, identity(n)) * f;
      });
    case GeneratorKind::Conjugation:
      return Superoperator::from_map(in, out,
                                     [&](const Matrix& a) { return eh_psi_value(f, a, c); });
    default:
      throw std::invalid_argument("hamiltonian_limit_psi: kind must be right-multiplication or conjugation");
  }
}

std::vector<double> generator_convergence(const HamiltonianSpec& spec, GeneratorKind kind,
                                          const Superoperator& psi_limit,
                                          const std::vector<double>& taus, const CondExp& c) {
  if (taus.empty()) throw std::invalid_argument("generator_convergence: empty tau list");
  std::vector<double> out;
  out.reserve(taus.size());
  for (double tau : taus) {
    const WalkGenerator w = hamiltonian_walk(spec, tau, c, kind);
    out.push_back(superop_distance(modify(w, tau, c), psi_limit));
  }
  return out;
}

double loglog_slope(const std::vector<double>& taus, const std::vector<double>& errors) {
  if (taus.size() != errors.size()) throw std::invalid_argument("loglog_slope: length mismatch");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < taus.size(); ++i)
    if (errors[i] > 0.0 && taus[i] > 0.0) {
      xs.push_back(std::log(taus[i]));
      ys.push_back(std::log(errors[i]));
    }
  if (xs.size() < 2) return 0.0;
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace qrwt
