// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "qrwt/cocycle.hpp"
#include "qrwt/experiment.hpp"
#include "qrwt/presets.hpp"
#include "qrwt/random.hpp"

using namespace qrwt;

namespace {

constexpr Index kDh = 2;

constexpr double kIdentityTol = 1e-11;
constexpr double kHpTol = 1e-10;
constexpr double kMinSlope = 0.4;
constexpr double kWalkReduction = 8.0;
constexpr double kOracleTol = 1e-12;
constexpr double kLindbladTol = 1e-10;
constexpr double kUnitalTol = 1e-11;
constexpr double kChoiTol = -1e-8;
constexpr double kC3Tol = 1e-10;

struct Fixture {
  GnsData g;
  CondExp c;
};

Fixture mixed() {
  Matrix rho = Matrix::Zero(3, 3);
  rho(0, 0) = 0.7;
  rho(1, 1) = 0.3;
  Fixture f;
  f.g = build_gns(rho);
  f.c = build_cond_exp(f.g, singleton_blocks(2));
  return f;
}

Fixture pure() {
  Matrix rho = Matrix::Zero(3, 3);
  rho(0, 0) = 1.0;
  Fixture f;
  f.g = build_gns(rho);
  f.c = build_cond_exp(f.g, single_block(1));
  return f;
}

Fixture faithful(std::uint64_t seed) {
  RandomSource rng(seed);
  Fixture f;
  f.g = build_gns(rng.density(3));
  f.c = build_cond_exp(f.g, singleton_blocks(3));
  return f;
}

std::vector<double> dyadic_taus() {
  std::vector<double> taus;
  for (int k = 2; k <= 9; ++k) taus.push_back(std::ldexp(1.0, -k));
  return taus;
}

Superoperator random_superop(RandomSource& rng, Index din, Index dout) {
  return Superoperator(OperatorShape::square(din), OperatorShape::square(dout),
                       rng.matrix(dout * dout, din * din));
}

Superoperator identity_lift(Index dh, Index n) {
  return Superoperator::from_map(OperatorShape::square(dh), OperatorShape::square(dh * n),
                                 [n](const Matrix& a) -> Matrix { return kron(a, identity(n)); });
}

StepFunction two_interval(const GnsData& g, RandomSource& rng, double b1, double b2) {
  return StepFunction::from_mu(g, {0.0, b1, b2},
                               {0.5 * rng.vector(g.khat_dim() - 1), 0.5 * rng.vector(g.khat_dim() - 1)});
}

Matrix non_normal() {
  Matrix a(2, 2);
  a << 1.0, 2.0, 0.0, 0.5;
  return a;
}

// Running maximum of residuals with the name of the worst one.
struct Worst {
  double value = 0.0;
  std::string name;
  void add(const std::string& what, double r) {
    if (!(r <= value)) {
      value = r;
      name = what;
    }
  }
};

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string format(const char* fmt, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b, c);
  return buf;
}

Outcome c1_identities() {
  Worst w;
  RandomSource rng(101);
  for (const Fixture& fx : {mixed(), pure(), faithful(102)}) {
    const GnsData& g = fx.g;
    const CondExp& c = fx.c;
    const Index n = g.particle_dim();
    for (int t = 0; t < 20; ++t) {
      const Matrix x = rng.matrix(n, n);
      const Complex rx = (g.state.rho * x).trace();
      w.add("state vector", std::abs(g.omega.dot(bracket(g, x)) - rx));
      const Matrix k = x - rx * identity(n);
      w.add("state kernel", std::abs(g.omega.dot(bracket(g, k))));
      const Matrix a = rng.matrix(kDh, kDh);
      w.add("state homomorphism",
            (slice(ampliate_pi(g, kron(a, x)), g.omega, g.omega) - rx * a).norm());
      const Matrix tt = rng.matrix(kDh * n, kDh * n);
      const Matrix p0 = kron(identity(kDh), g.p0);
      w.add("slice kernel", (slice_state(g, p0 * tt * p0) - slice_state(g, tt)).norm());
      w.add("state preservation", std::abs(state_value(g, c.d(x)) - rx));
      const Matrix e = apply_e(c, tt);
      w.add("kernel blocks", (kernel_projector(c, kDh) * e).norm() + (e * kernel_projector(c, kDh)).norm());
      w.add("idempotence", (apply_e(c, e) - e).norm());
    }
    for (int t = 0; t < 3; ++t) {
      const WalkGenerator wg = WalkGenerator::from_superop(
          identity_lift(kDh, n) + random_superop(rng, kDh, kDh * n) * 0.5, n);
      for (double tau : {1.0, 0.3, 0.01}) w.add("crucial identity", check_cruc(wg, tau, c));
      const Superoperator psi = random_superop(rng, kDh, kDh * n);
      const LimitGenerator lg = limit_generator(psi, g, c);
      w.add("slice identities", check_slice_identities(psi, lg, g, c).max());
      const Matrix f = rng.matrix(kDh * n, kDh * n);
      w.add("Evans-Hudson identity", eh_generator(f, g, c).ehpsi_residual);
      const SubspaceSplit& sp = c.split;
      const Matrix a = rng.matrix(kDh, kDh);
      const Matrix up = eh_upsilon(f, a, c);
      const Matrix x = sp.front_front(f), z = sp.back_front(f);
      const Matrix xp = apply_e0_perp(c, x);
      const Matrix a0 = kron(a, identity(sp.front_dim())), ax = kron(a, identity(sp.back_dim()));
      const Matrix expect = apply_e0(c, xp.adjoint() * a0 * xp + z.adjoint() * ax * z);
      w.add("Upsilon block", (sp.front_front(up) - expect).norm());
    }
  }
  for (Complex z : {Complex(1.0), Complex(0.0, 1.0), Complex(2.0, -3.0)}) {
    w.add("scalar exp identity 1", std::abs(decap_exp(1, z) * std::exp(-z) - decap_exp(1, -z)));
    w.add("scalar exp identity 2",
          std::abs(decap_exp(1, z) * decap_exp(1, -z) - decap_exp(2, z) - decap_exp(2, -z)));
  }
  for (int t = 0; t < 5; ++t) {
    const Matrix h = rng.hermitian(3);
    const Complex mi(0.0, -1.0);
    const Matrix e1p = decap_exp(1, h, mi), e1m = decap_exp(1, h, -mi);
    w.add("matrix exp identity 1", (e1p * mat_exp(-mi * h) - e1m).norm());
    w.add("matrix exp identity 2", (e1p * e1m - decap_exp(2, h, mi) - decap_exp(2, h, -mi)).norm());
  }
  return {w.value <= kIdentityTol, format("max residual %.3g", w.value) + " (" + w.name + ")"};
}

Outcome c2_noise_arithmetic() {
  bool ok = noise_bound(3, 2, 2) == 12;
  for (long long n = 1; n <= 6; ++n) {
    ok = ok && noise_bound(n, 1, 1) == n * n - 1;
    for (long long l = 1; l <= n * n; ++l) ok = ok && noise_bound(n, n, l) == 2 * (n * n - l);
    for (long long k = 1; k <= n; ++k)
      for (long long l = 1; l <= k * k; ++l)
        ok = ok && ((noise_bound(n, k, l) == n * n * k * k - 1) == (k == 1));
  }
  const C3Report rep = run_c3_example(random_c3_example(kDh, 5, 0.7), 5, 8);
  const int count = rep.count.total();
  ok = ok && count == 10 && rep.bound == 12;
  return {ok, "example count " + std::to_string(count) + " of bound " + std::to_string(rep.bound)};
}

Outcome c3_hp_certification() {
  const Fixture fx = mixed();
  Worst w;
  bool controls = true, blocks = true;
  RandomSource rng(301);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const HamiltonianLimit hl = f_from_hamiltonian(random_hamiltonian_spec(fx.c, kDh, seed), fx.c);
    const LimitGenerator lg = limit_generator_from_f(hl.f, fx.g, fx.c);
    const HpCheck hp = hp_check(*lg.g_matrix, fx.g);
    w.add("isometry", hp.isometry_residual);
    w.add("coisometry", hp.coisometry_residual);
    blocks = blocks && hp_block_check(hl.f, fx.g, fx.c).unitary;
    w.add("block conditions", hp_blocks_residual(hl.blocks, fx.g, fx.c));

    HpBlocks bad_k = hl.blocks;
    bad_k.k += 0.1 * apply_e0(fx.c, rng.hermitian(kDh * fx.c.split.front_dim()));
    const Matrix fk = f_from_blocks(bad_k, fx.c, kDh);
    controls = controls && !hp_check(*limit_generator_from_f(fk, fx.g, fx.c).g_matrix, fx.g).isometric &&
               !hp_block_check(fk, fx.g, fx.c).isometric;
    HpBlocks bad_v = hl.blocks;
    bad_v.v *= 1.1;
    const Matrix fv = f_from_blocks(bad_v, fx.c, kDh);
    controls = controls && !hp_check(*limit_generator_from_f(fv, fx.g, fx.c).g_matrix, fx.g).unitary &&
               !hp_block_check(fv, fx.g, fx.c).unitary;
  }
  const bool ok = w.value <= kHpTol && blocks && controls;
  return {ok, format("max residual %.3g", w.value) + ", block checks " + (blocks ? "ok" : "failed") +
                  ", negative controls " + (controls ? "rejected" : "accepted")};
}

Outcome c4_generator_convergence() {
  const Fixture fx = mixed();
  const std::vector<double> taus = dyadic_taus();
  double worst_slope = 1e300;
  bool monotone = true;
  for (bool perturbed : {false, true}) {
    const HamiltonianSpec spec = random_hamiltonian_spec(fx.c, kDh, 4, perturbed);
    HamiltonianSpec bare = spec;
    bare.r00 = Matrix();
    bare.r0x = Matrix();
    bare.rxx = Matrix();
    for (GeneratorKind kind : {GeneratorKind::RightMultiplication, GeneratorKind::Conjugation}) {
      const Superoperator psi = hamiltonian_limit_psi(bare, fx.g, fx.c, kind);
      const std::vector<double> d = generator_convergence(spec, kind, psi, taus, fx.c);
      for (std::size_t i = 1; i < d.size(); ++i) monotone = monotone && d[i] < d[i - 1];
      worst_slope = std::min(worst_slope, loglog_slope(taus, d));
    }
  }
  return {monotone && worst_slope >= kMinSlope,
          format("min slope %.4f", worst_slope) + (monotone ? ", strictly decreasing" : ", not monotone")};
}

Outcome c5_walk_convergence() {
  const std::vector<double> taus = dyadic_taus();
  const Matrix a = non_normal();
  const double t = 1.0;
  bool ok = true;
  std::string detail;
  for (const auto& [name, fx] : {std::pair{"mixed", mixed()}, std::pair{"pure", pure()}}) {
    const HamiltonianSpec spec = random_hamiltonian_spec(fx.c, kDh, 4);
    RandomSource rng(17);
    const StepFunction f = two_interval(fx.g, rng, 0.3, 0.8);
    const StepFunction gf = two_interval(fx.g, rng, 0.45, 1.0);
    const Vector u = rng.vector(kDh), v = rng.vector(kDh);
    const Matrix lf = f_from_hamiltonian(spec, fx.c).f;
    for (GeneratorKind kind : {GeneratorKind::RightMultiplication, GeneratorKind::Conjugation}) {
      const LimitGenerator lg = kind == GeneratorKind::RightMultiplication ? limit_generator_from_f(lf, fx.g, fx.c)
                                                                           : eh_generator(lf, fx.g, fx.c).psi;
      const Complex limit = cocycle_matrix_element(lg, fx.g, a, u, v, f, gf, t);
      std::vector<double> e;
      for (double tau : taus) {
        const WalkRun run(hamiltonian_walk(spec, tau, fx.c, kind), fx.g, tau);
        e.push_back(std::abs(walk_matrix_element(run, a, u, v, f, gf, t) - limit));
      }
      const double slope = loglog_slope(taus, e);
      ok = ok && e.back() <= e.front() / kWalkReduction && slope >= kMinSlope;
      if (!detail.empty()) detail += "; ";
      detail += std::string(name) + " " + to_string(kind) +
                format(": e %.3g -> %.3g, slope %.4f", e.front(), e.back(), slope);
    }
  }
  return {ok, detail};
}

Outcome c6_oracle() {
  RandomSource rng(601);
  const Fixture fixtures[] = {mixed(), pure()};
  double worst = 0.0;
  for (int instance = 0; instance < 20; ++instance) {
    const Fixture& fx = fixtures[instance % 2];
    const Index kd = fx.g.khat_dim();
    const Superoperator phi_hat = identity_lift(kDh, kd) + random_superop(rng, kDh, kDh * kd) * 0.5;
    const WalkRun run(phi_hat, fx.g, 0.1);
    const Matrix a = rng.matrix(kDh, kDh);
    const Vector u = rng.vector(kDh), v = rng.vector(kDh);
    for (int n = 0; n <= 3; ++n) {
      std::vector<Vector> xs, ys;
      for (int m = 0; m < n; ++m) {
        xs.push_back(rng.vector(kd));
        ys.push_back(rng.vector(kd));
      }
      const Complex dense = dense_walk_oracle(phi_hat, n, a, u, v, xs, ys);
      const Complex rec = recursive_walk_element(run, a, u, v, xs, ys);
      worst = std::max(worst, std::abs(dense - rec) / std::max(1.0, std::abs(dense)));
    }
  }
  return {worst <= kOracleTol, format("max scaled difference %.3g", worst)};
}

Outcome c7_lindblad() {
  const Fixture fx = mixed();
  double closed = 0.0, unital = 0.0, choi = 1e300;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const HamiltonianLimit hl = f_from_hamiltonian(random_hamiltonian_spec(fx.c, kDh, seed), fx.c);
    const EhGenerator eh = eh_generator(hl.f, fx.g, fx.c);
    const Superoperator l = lindblad(eh.psi, fx.g);
    closed = std::max(closed, superop_distance(l, lindblad_closed_form(hl.blocks, fx.g, kDh)));
    unital = std::max(unital, l(identity(kDh)).norm());
    for (double t : {0.1, 1.0}) choi = std::min(choi, min_hermitian_eigenvalue(choi_matrix(superop_exp(l, t))));
  }
  const bool ok = closed <= kLindbladTol && unital <= kUnitalTol && choi >= kChoiTol;
  return {ok, format("closed form %.3g, L(I) %.3g, min Choi eigenvalue %.3g", closed, unital, choi)};
}

Outcome c8_example_c3() {
  const RunReport r = run_experiment(
      "example-c3", parse_config(nlohmann::json::parse(R"({"system_dim": 2, "seed": 5, "c3": {"lambda1": 0.7}})")),
      RunOptions{});
  const auto& s = r.summary;
  double worst = 0.0;
  for (const char* key : {"f_entry_residual", "vacuum_residual", "creation_residual", "annihilation_residual",
                          "gauge_residual"})
    worst = std::max(worst, s[key].get<double>());
  const bool ok = r.passed && worst <= kC3Tol;
  return {ok, format("max residual %.3g", worst) + ", count " + std::to_string(s["count"]["total"].get<int>())};
}

struct Criterion {
  int id;
  double limit_s;  // 0 for no runtime limit
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, 5.0, c1_identities},         {2, 0.0, c2_noise_arithmetic}, {3, 10.0, c3_hp_certification},
      {4, 30.0, c4_generator_convergence}, {5, 60.0, c5_walk_convergence}, {6, 0.0, c6_oracle},
      {7, 0.0, c7_lindblad},           {8, 0.0, c8_example_c3},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool passed = out.passed;
    if (c.limit_s > 0.0 && secs >= c.limit_s) {
      passed = false;
      out.detail += format(", over the %.0f s limit", c.limit_s);
    }
    if (!passed) ++failures;
    std::printf("criterion %d: %s  %s [%.3f s]\n", c.id, passed ? "PASS" : "FAIL", out.detail.c_str(), secs);
  }
  return failures == 0 ? 0 : 1;
}
