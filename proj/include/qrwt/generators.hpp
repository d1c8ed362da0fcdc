// Random-walk generators, their modifications, and the limit generator psi.
//
// A walk generator is a map Phi : B(h) -> B(h (x) k).  With Phi'(a) = Phi(a) - a (x) I,
// its modification is
//
//   f(a) = P0~ (E/tau + E^perp/sqrt(tau))(Phi'(a)) P0~
//        + (P0~ Phi(a) P0~^perp + P0~^perp Phi(a) P0~)/sqrt(tau) + P0~^perp Phi'(a) P0~^perp,
//
// and a limit Psi of such modifications determines the cocycle generator
// psi : B(h) -> B(h (x) khat).
#pragma once

#include <cstdint>
#include <optional>

#include "qrwt/cond_exp.hpp"
#include "qrwt/state_gns.hpp"
#include "qrwt/superoperator.hpp"

namespace qrwt {

enum class GeneratorKind { RawMatrix, RightMultiplication, Conjugation, Explicit };

const char* to_string(GeneratorKind kind);

struct WalkGenerator {
  GeneratorKind kind = GeneratorKind::Explicit;
  Index system_dim = 0;
  Index particle_dim = 0;
  Superoperator phi;
  /// The matrix defining phi: F for a -> (a (x) I) F, U for a -> U* (a (x) I) U.
  /// Empty for explicit generators.
  Matrix factor;

  /// a -> (a (x) I) F.
  static WalkGenerator raw_matrix(const Matrix& f, Index system_dim);
  /// a -> (a (x) I) U.  Unitarity of U is not enforced; see walk_unitarity_check.
  static WalkGenerator right_multiplication(const Matrix& u, Index system_dim);
  /// a -> U* (a (x) I) U.
  static WalkGenerator conjugation(const Matrix& u, Index system_dim);
  static WalkGenerator from_superop(Superoperator phi, Index particle_dim);
};

struct LimitGenerator {
  Superoperator psi;  // B(h) -> B(h (x) khat)
  /// Present when psi(a) = (a (x) I) G.
  std::optional<Matrix> g_matrix;
  /// max over a basis of ||psi(a) - (a (x) I) G||_F when G is present.
  double multiplication_residual = 0.0;

  Index system_dim() const { return psi.in_shape().rows; }
};

/// The linear map T -> f-value applied to T = Phi'(a).
Matrix modification_map(const Matrix& t, double tau, const CondExp& c);

/// Inverse of modification_map: the generator increment whose modification is `s`.
Matrix demodification_map(const Matrix& s, double tau, const CondExp& c);

Superoperator modify(const WalkGenerator& w, double tau, const CondExp& c);

/// Vacuum-state modification of phi_hat : B(h) -> B(h (x) khat) relative to Omega.
Superoperator modify_vacuum(const Superoperator& phi_hat, double tau, const GnsData& g);

/// Residual of (tau E + sqrt(tau) E^perp)(f(a)) = Phi'(a) + (sqrt(tau) - 1) P0~^perp Phi'(a) P0~^perp,
/// maximised over the elementary matrices a of B(h).
double check_cruc(const WalkGenerator& w, double tau, const CondExp& c);

/// Value of psi at a point, given T = Psi(a): the four-term compression onto
/// C Omega and its complement.  Applied to F it yields G.
Matrix lift_limit_value(const Matrix& t, const GnsData& g, const CondExp& c);

LimitGenerator limit_generator(const Superoperator& psi_limit, const GnsData& g, const CondExp& c);

/// Limit generator of Psi(a) = (a (x) I) F; also fills in G.
LimitGenerator limit_generator_from_f(const Matrix& f, const GnsData& g, const CondExp& c);

/// pi~ o Phi as a map into B(h (x) khat).
Superoperator ampliate_generator(const WalkGenerator& w, const GnsData& g);

/// Residuals of the slice identities relating psi to Psi, for X, Y in ker rho:
///   E^Omega psi(a) E_Omega = E^Omega pi~(Psi(a)) E_Omega = rho-slice of Psi(a),
///   E^Omega psi(a) E_[Y]   = E^Omega pi~(Psi(a)) E_[d^perp(Y)],
///   E^[X] psi(a) E_Omega   = E^[d^perp(X)] pi~(Psi(a)) E_Omega,
///   E^[X] psi(a) E_[Y]     = E^[P0^perp X] pi~(Psi(a)) E_[P0^perp Y].
struct SliceIdentityReport {
  double vacuum = 0.0;
  double annihilation = 0.0;
  double creation = 0.0;
  double gauge = 0.0;
  double max() const;
};

SliceIdentityReport check_slice_identities(const Superoperator& psi_limit,
                                           const LimitGenerator& lg, const GnsData& g,
                                           const CondExp& c, int trials = 8,
                                           std::uint64_t seed = 13);

/// Generator whose modification equals psi_limit exactly at step size tau.
WalkGenerator exact_scaling_generator(const Superoperator& psi_limit, double tau,
                                      const CondExp& c);
/// Same for Psi(a) = (a (x) I) F; the result is of raw-matrix kind.
WalkGenerator exact_scaling_generator(const Matrix& f, double tau, const CondExp& c);

/// 2 (N k - l) + (N - k)^2 k^2.  Throws std::invalid_argument out of range.
long long noise_bound(long long n, long long k, long long l);

struct NoiseCount {
  int creation = 0;      // nonzero blocks E^{mu_i} psi(a) E_Omega
  int annihilation = 0;  // nonzero blocks E^Omega psi(a) E_{mu_j}
  int gauge = 0;         // nonzero blocks E^{mu_i} psi(a) E_{mu_j}
  int total() const { return creation + annihilation + gauge; }
};

/// Counts noise directions with a nonvanishing coefficient block, relative
/// threshold 1e-9 ||psi(a)||_F, in the canonical noise basis of `g`.  A
/// direction counts if its block is nonzero for any of `trials` random arguments.
NoiseCount effective_noise_count(const LimitGenerator& lg, const GnsData& g, int trials,
                                 std::uint64_t seed = 11);

}  // namespace qrwt
