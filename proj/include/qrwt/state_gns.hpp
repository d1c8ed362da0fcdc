// Concrete GNS representation of a normal state on B(k), dim k = N.
//
// The enlarged noise space is khat = k (x) conj(k0), where k0 is the support
// of the density matrix.  Coordinates: the k factor uses the canonical basis of
// C^N; conj(k0) uses the conjugates of the support eigenvectors e_1..e_r, so a
// vector of khat is stored at index i * r + j for the pair (i, j).  With these
// conventions
//
//   Omega = sum_j sqrt(lambda_j) e_j (x) conj(e_j),   [X] = pi(X) Omega,
//   pi(X) = X (x) I_r.
#pragma once

#include "qrwt/linalg.hpp"

namespace qrwt {

inline constexpr double kDefaultSupportTol = 1e-10;

struct DensityState {
  Matrix rho;
  /// Descending; entries at or below the support tolerance are stored as 0.
  RealVector eigenvalues;
  /// Orthonormal eigenvectors as columns, support first.  Within a degenerate
  /// eigenspace the basis is the Gram-Schmidt image of the canonical basis, so
  /// it does not depend on the eigensolver.
  Matrix eigenvectors;
  Index support_rank = 0;

  Index dim() const { return rho.rows(); }
};

/// Validates rho (Hermitian, unit trace, eigenvalues >= -1e-12) and computes
/// its spectral data.  Throws std::invalid_argument on failure.
DensityState make_density_state(const Matrix& rho, double support_tol = kDefaultSupportTol);

struct GnsData {
  DensityState state;
  /// The eigenbasis of rho split into k0 (front) and its complement (back).
  SubspaceSplit split;
  Matrix p0;
  /// Faithful restriction F0* rho F0 in the support eigenbasis.
  Matrix rho0;
  RealVector weights;  // lambda_1 .. lambda_r
  Vector omega;
  /// Orthonormal basis of the orthogonal complement of Omega in khat.
  Matrix mu_basis;

  Index particle_dim() const { return state.dim(); }
  Index support_dim() const { return state.support_rank; }
  Index khat_dim() const { return particle_dim() * support_dim(); }
  Matrix support_basis() const { return split.front(); }
};

GnsData build_gns(const Matrix& rho, double support_tol = kDefaultSupportTol);

/// tr(rho X), evaluated on the support decomposition.
Complex state_value(const GnsData& g, const Matrix& x);

/// pi(X) = X (x) I on khat.
Matrix represent(const GnsData& g, const Matrix& x);

/// [X] = pi(X) Omega.
Vector bracket(const GnsData& g, const Matrix& x);

/// pi~(T) = T (x) I for T on h (x) k.
Matrix ampliate_pi(const GnsData& g, const Matrix& t);

/// Slice map id (x) rho: B(h (x) k) -> B(h).
Matrix slice_state(const GnsData& g, const Matrix& t);

/// Delta^perp = I_h (x) |Omega><Omega| and Delta = I - Delta^perp on h (x) khat.
Matrix vacuum_projector(const GnsData& g, Index system_dim);
Matrix noise_projector(const GnsData& g, Index system_dim);

/// Omega + x.
Vector hat(const GnsData& g, const Vector& x);

/// Maps coordinates with respect to mu_basis into khat.
Vector from_mu_coordinates(const GnsData& g, const Vector& coords);

}  // namespace qrwt
