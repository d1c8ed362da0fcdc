// Seeded fixtures: random Hamiltonian data and the three-level example with a
// two-dimensional support.
#pragma once

#include <cstdint>
#include <vector>

#include "qrwt/cocycle.hpp"

namespace qrwt {

/// Operator on h (x) C^n from an n x n array of blocks on h, where
/// blocks[i][j] is the (i, j) entry over the particle index.
Matrix from_particle_blocks(const std::vector<std::vector<Matrix>>& blocks);

/// The (i, j) block over the particle index of an operator on h (x) C^n.
Matrix particle_block(const Matrix& t, Index i, Index j, Index n);

/// Random spec compatible with `c`: h_d = E0(H1), h_o = H2 - E0(H2), L and h_x
/// complex Gaussian, scaled by `scale`.  With `perturbed` the r-blocks are
/// drawn as well.
HamiltonianSpec random_hamiltonian_spec(const CondExp& c, Index system_dim, std::uint64_t seed,
                                        bool perturbed = false, double scale = 0.5);

struct C3Example {
  double lambda1 = 0.7;
  double lambda2 = 0.3;
  Matrix b, c, g, l, m, h;  // operators on h; b, c, h self-adjoint

  Index system_dim() const { return b.rows(); }
  Matrix density() const;
  HamiltonianSpec spec(const SubspaceSplit& split) const;
  /// Entries of F as printed for this example (with g g* in the (2,2) entry).
  std::vector<std::vector<Matrix>> f_entries() const;
};

C3Example random_c3_example(Index system_dim, std::uint64_t seed, double lambda1 = 0.7);

struct C3Report {
  double f_entry_residual = 0.0;    // F from the Hamiltonian vs the printed entries
  double vacuum_residual = 0.0;     // E^Omega psi(a) E_Omega = a (l1 F11 + l2 F22)
  double creation_residual = 0.0;   // E^{[f_ij]} psi(a) E_Omega = sqrt(l_j) a F_ij
  double annihilation_residual = 0.0;  // E^Omega psi(a) E_{[f_ij]} = sqrt(l_j) a F_ji
  double gauge_residual = 0.0;      // E^{[f_3k]} psi(a) E_{[f_3l]} = [k = l] a F33
  NoiseCount count;
  long long bound = 0;
  long long rank_l = 0;
  bool unitary = false;

  double max_residual() const;
};

/// Builds everything for the example and checks the displayed relations on
/// `trials` random arguments a.
C3Report run_c3_example(const C3Example& ex, std::uint64_t seed, int trials = 4);

}  // namespace qrwt
