// State-preserving conditional expectations built as pinchings.
//
// d0 acts on B(k0) in the support eigenbasis of rho; d(X) = F0 d0(F0* X F0) F0*
// extends it to B(k), and the ampliations id_h (x) d0 and id_h (x) d act on
// B(h (x) k0) and B(h (x) k) for any system dimension.
#pragma once

#include <cstdint>
#include <vector>

#include "qrwt/state_gns.hpp"
#include "qrwt/superoperator.hpp"

namespace qrwt {

/// Disjoint blocks of 0-based support-eigenbasis indices covering 0..r-1.
using BlockPartition = std::vector<std::vector<Index>>;

struct CondExp {
  BlockPartition blocks;
  SubspaceSplit split;  // copied from the GNS data
  Superoperator d0;     // on B(k0)
  Superoperator d;      // on B(k)
  Index rank_l = 0;
};

/// Pinching d0(X) = sum_b P_b X P_b.  Throws std::invalid_argument if `blocks`
/// is not a partition of the support indices or a block projector fails to
/// commute with rho0 beyond 1e-10.
CondExp build_cond_exp(const GnsData& g, const BlockPartition& blocks);

/// Wraps an arbitrary linear map on B(k0); used to probe the validator.
/// rank_l is the numerical rank of d0's matrix.
CondExp cond_exp_from_map(const GnsData& g, Superoperator d0);

BlockPartition singleton_blocks(Index support_dim);
BlockPartition single_block(Index support_dim);

/// id_h (x) d0 on an operator on h (x) k0.
Matrix apply_e0(const CondExp& c, const Matrix& a);
Matrix apply_e0_perp(const CondExp& c, const Matrix& a);

/// id_h (x) d on an operator on h (x) k.
Matrix apply_e(const CondExp& c, const Matrix& t);
Matrix apply_e_perp(const CondExp& c, const Matrix& t);

/// I_h (x) P0 and its complement for a given system dimension.
Matrix support_projector(const CondExp& c, Index system_dim);
Matrix kernel_projector(const CondExp& c, Index system_dim);

/// id_h (x) d as a superoperator on B(h (x) k).
Superoperator ampliated_superop(const CondExp& c, Index system_dim);

/// id_h (x) rho0 : B(h (x) k0) -> B(h), evaluated in the support eigenbasis.
Matrix slice_state0(const GnsData& g, const Matrix& a);

struct CondExpReport {
  double idempotency = 0.0;       // ||d0 o d0 - d0||
  double self_adjointness = 0.0;  // max |<d0 Z, W> - <Z, d0 W>|, <Z,W> = rho0(Z* W)
  double bimodule = 0.0;          // max ||d(d(X)Y) - d(X)d(Y)||, ||d(X d(Y)) - d(X)d(Y)||
  double state_preservation = 0.0;
  double kernel_identities = 0.0;  // identities P0~ E(T) = E(T) = E(T) P0~ etc.
  double choi_min_eigenvalue = 0.0;

  bool idempotent() const;
  bool self_adjoint() const;
  bool bimodular() const;
  bool preserves_state() const;
  bool kernel_ok() const;
  bool completely_positive() const;
  bool passed() const;
};

CondExpReport validate_cond_exp(const CondExp& c, const GnsData& g, std::uint64_t seed = 7,
                                int trials = 8);

}  // namespace qrwt
