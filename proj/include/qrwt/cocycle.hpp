// Limit dynamics: the cocycle j^psi and the driving process X against
// exponential vectors, Hudson-Parthasarathy conditions, the limit generator of
// a scaled Hamiltonian, Evans-Hudson generators and their Lindblad part.
#pragma once

#include <vector>

#include "qrwt/cond_exp.hpp"
#include "qrwt/generators.hpp"
#include "qrwt/state_gns.hpp"
#include "qrwt/walk.hpp"

namespace qrwt {

/// Blocks of a total Hamiltonian in support-eigenbasis coordinates: h (x) k0
/// for h_d, h_o and r00; h (x) k0^perp for h_x and rxx; h (x) k0 -> h (x) k0^perp
/// for l and r0x.  The r-blocks are optional (empty means absent) and enter as
/// R(tau) = sqrt(tau) r.
struct HamiltonianSpec {
  Index system_dim = 0;
  Matrix h_d;
  Matrix h_o;
  Matrix l;
  Matrix h_x;
  Matrix r00;
  Matrix r0x;
  Matrix rxx;

  bool has_perturbation() const { return r00.size() + r0x.size() + rxx.size() > 0; }
};

/// Checks shapes, Hermiticity (1e-12) and E0(h_d) = h_d, E0(h_o) = 0.
/// Throws std::invalid_argument naming the offending block.
void validate_spec(const HamiltonianSpec& spec, const CondExp& c);

/// H_t(tau) on h (x) k in canonical coordinates.  No validation.
Matrix total_hamiltonian(const HamiltonianSpec& spec, double tau, const CondExp& c);

/// exp(-i tau H_t(tau)) by scaling and squaring.
Matrix step_unitary(const HamiltonianSpec& spec, double tau, const CondExp& c);

WalkGenerator hamiltonian_walk(const HamiltonianSpec& spec, double tau, const CondExp& c,
                               GeneratorKind kind);

/// Blocks of F = [[-i(H_d + H_o) - K/2, -D* V], [D, V - I]].
struct HpBlocks {
  Matrix h_d;
  Matrix h_o;
  Matrix k;
  Matrix d;
  Matrix v;
};

struct HamiltonianLimit {
  Matrix f;
  HpBlocks blocks;
};

/// Limit F of the right-multiplication walk, with the unitary blocks.
HamiltonianLimit f_from_hamiltonian(const HamiltonianSpec& spec, const CondExp& c);

/// Assembles F from blocks; used for negative controls.
Matrix f_from_blocks(const HpBlocks& blocks, const CondExp& c, Index system_dim);

struct HpCheck {
  double isometry_residual = 0.0;    // ||G + G* + G* Delta G||_F
  double coisometry_residual = 0.0;  // ||G + G* + G Delta G*||_F
  bool isometric = false;
  bool coisometric = false;
  bool unitary = false;
};

HpCheck hp_check(const Matrix& g_matrix, const GnsData& g);

struct HpBlockCheck {
  // Residuals of the compressed pieces of G + G* + G* Delta G.
  double f1 = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;
  double decomposition = 0.0;  // G + G* + G* Delta G minus its four-term decomposition
  // Block conditions with F = [[A + B, C], [D, E]], A = E0(A), E0(B) = 0, V = E + I.
  double b_skew = 0.0;        // ||B + B*||
  double c_condition = 0.0;   // ||C + D* V||
  double state_condition = 0.0;  // ||rho0(A + A*) + rho0(B* B + D* D)||
  double v_isometry = 0.0;    // ||E + E* + E* E|| = ||V* V - I||
  double v_coisometry = 0.0;  // ||V V* - I||
  bool isometric = false;
  bool coisometric = false;
  bool unitary = false;
};

HpBlockCheck hp_block_check(const Matrix& f, const GnsData& g, const CondExp& c);

/// Conditions (i)-(iv) on explicit blocks; max residual.
double hp_blocks_residual(const HpBlocks& blocks, const GnsData& g, const CondExp& c);

/// a -> E^{x^} psi(a) E_{y^} with x^ = Omega + x, y^ = Omega + y.
Superoperator cocycle_slice_map(const LimitGenerator& lg, const GnsData& g, const Vector& x,
                                const Vector& y);

/// The map a -> E^{e(f)} j_t(a) E_{e(g)}.
Superoperator cocycle_map(const LimitGenerator& lg, const GnsData& g, const StepFunction& f,
                          const StepFunction& gfun, double t);

Complex cocycle_matrix_element(const LimitGenerator& lg, const GnsData& g, const Matrix& a,
                               const Vector& u, const Vector& v, const StepFunction& f,
                               const StepFunction& gfun, double t);

/// Precomputed slices of psi for repeated cocycle evaluations.
class CocycleSolver {
 public:
  CocycleSolver(const LimitGenerator& lg, const GnsData& g);
  Superoperator map(const StepFunction& f, const StepFunction& gfun, double t) const;
  Complex matrix_element(const Matrix& a, const Vector& u, const Vector& v,
                         const StepFunction& f, const StepFunction& gfun, double t) const;

 private:
  SliceTable table_;
  Vector omega_;
};

/// x_t = E^{e(f)} X_t E_{e(g)} for the right HP equation with coefficient G.
Matrix hp_solve(const Matrix& g_matrix, const GnsData& g, const StepFunction& f,
                const StepFunction& gfun, double t);

struct EhGenerator {
  Superoperator psi_limit;  // Psi : B(h) -> B(h (x) k)
  LimitGenerator psi;
  Matrix g_matrix;
  /// max over a basis of ||psi(a) - (a G + G* a + G* Delta a Delta G)||_F.
  double ehpsi_residual = 0.0;
};

EhGenerator eh_generator(const Matrix& f, const GnsData& g, const CondExp& c);

/// Upsilon(a) from its defining three-term expression.
Matrix eh_upsilon(const Matrix& f, const Matrix& a, const CondExp& c);
/// Upsilon(a) assembled from the blocks X, Z, W of F.
Matrix eh_upsilon_blocks(const Matrix& f, const Matrix& a, const CondExp& c);

/// L(a) = E^Omega psi(a) E_Omega.
Superoperator lindblad(const LimitGenerator& lg, const GnsData& g);

/// Closed form of the Evans-Hudson Lindblad generator from the unitary blocks.
Superoperator lindblad_closed_form(const HpBlocks& blocks, const GnsData& g, Index system_dim);

/// Limit Psi of the modified walk generators for the given kind.
Superoperator hamiltonian_limit_psi(const HamiltonianSpec& spec, const GnsData& g,
                                    const CondExp& c, GeneratorKind kind);

/// superop_distance(f_{Phi(tau), tau}, Psi) for each tau.
std::vector<double> generator_convergence(const HamiltonianSpec& spec, GeneratorKind kind,
                                          const Superoperator& psi_limit,
                                          const std::vector<double>& taus, const CondExp& c);

/// Least-squares slope of log(error) against log(tau) over positive errors; 0
/// when fewer than two positive errors remain.
double loglog_slope(const std::vector<double>& taus, const std::vector<double>& errors);

}  // namespace qrwt
