// Embedded random walks on toy Fock space.
//
// A walk is driven by phi_hat : B(h) -> B(h (x) khat).  Against product
// vectors the n-step walk reduces to a chain of slice maps
//
//   <u (x) x_0 (x) ... (x) x_{n-1}, Phi^(n)(a) v (x) y_0 (x) ... (x) y_{n-1}>
//     = <u, (M_0 o M_1 o ... o M_{n-1})(a) v>,   M_m(b) = E^{x_m} phi_hat(b) E_{y_m},
//
// so the slot of the latest step is sliced first.
#pragma once

#include <vector>

#include "qrwt/generators.hpp"
#include "qrwt/state_gns.hpp"
#include "qrwt/superoperator.hpp"

namespace qrwt {

/// Piecewise-constant function on [0, infinity) with values in khat.  The value
/// on [breakpoints[i], breakpoints[i+1]) is values[i]; the function vanishes
/// from breakpoints.back() on.
struct StepFunction {
  std::vector<double> breakpoints{0.0};
  std::vector<Vector> values;
  Index dim = 0;

  static StepFunction zero(Index dim);
  static StepFunction make(std::vector<double> breakpoints, std::vector<Vector> values);
  /// Builds a function whose interval values are given in mu_basis coordinates.
  static StepFunction from_mu(const GnsData& g, std::vector<double> breakpoints,
                              const std::vector<Vector>& coords);

  double support_end() const { return breakpoints.back(); }
  Vector value_at(double t) const;
  /// Throws std::invalid_argument unless breakpoints start at 0 and increase
  /// strictly and every value is orthogonal to Omega (1e-12).
  void validate(const GnsData& g) const;
};

/// int_0^infinity <f(s), g(s)> ds.
Complex integral_inner(const StepFunction& f, const StepFunction& g);

/// <e(f), e(g)> = exp(int <f, g>).
Complex exponential_inner(const StepFunction& f, const StepFunction& g);

/// f(n; tau) = tau^{-1/2} int_{n tau}^{(n+1) tau} f for n = 0 .. n_max - 1.
std::vector<Vector> dtau_coeffs(const StepFunction& f, double tau, Index n_max);

/// Union of breakpoints of f and g, clipped to [0, t], with t appended.
std::vector<double> merged_breakpoints(const StepFunction& f, const StepFunction& g, double t);

/// Slice maps b -> E^x T(b) E_y of a map T : B(h) -> B(h (x) K), tabulated on
/// the canonical basis of K so that any slice costs one linear combination.
class SliceTable {
 public:
  SliceTable() = default;
  SliceTable(const Superoperator& map, Index inner_dim);

  Index system_dim() const { return system_dim_; }
  Index inner_dim() const { return inner_dim_; }
  const Matrix& basis_slice(Index alpha, Index beta) const {
    return slices_[alpha * inner_dim_ + beta];
  }
  /// Matrix (on vec(B(h))) of b -> E^x T(b) E_y.
  Matrix combine(const Vector& x, const Vector& y) const;

 private:
  Index system_dim_ = 0;
  Index inner_dim_ = 0;
  std::vector<Matrix> slices_;
};

class WalkRun {
 public:
  /// Walk driven by pi~ o Phi for the given generator.
  WalkRun(const WalkGenerator& w, const GnsData& g, double tau);
  /// Walk driven directly by phi_hat : B(h) -> B(h (x) khat).
  WalkRun(const Superoperator& phi_hat, const GnsData& g, double tau);

  double tau() const { return tau_; }
  Index system_dim() const { return table_.system_dim(); }
  GeneratorKind kind() const { return kind_; }
  const Matrix& factor() const { return factor_; }
  const Superoperator& phi_hat() const { return phi_hat_; }
  const SliceTable& table() const { return table_; }
  const Vector& omega() const { return omega_; }

  /// floor(t / tau), robust to rounding when t is a multiple of tau.
  Index steps(double t) const;
  /// b -> E^x phi_hat(b) E_y.
  Matrix step_map(const Vector& x, const Vector& y) const { return table_.combine(x, y); }

 private:
  double tau_ = 0.0;
  GeneratorKind kind_ = GeneratorKind::Explicit;
  Matrix factor_;
  Superoperator phi_hat_;
  SliceTable table_;
  Vector omega_;
};

/// <u e(f), J_t(a) v e(g)> with unnormalised exponential vectors.
Complex walk_matrix_element(const WalkRun& run, const Matrix& a, const Vector& u,
                            const Vector& v, const StepFunction& f, const StepFunction& g,
                            double t);

/// <u (x) x_0 (x) ... , Phi^(n)(a) v (x) y_0 (x) ...> from the dense n-step walk
/// on h (x) khat^{(x) n}.  Throws std::invalid_argument for n outside 0..3.
Complex dense_walk_oracle(const Superoperator& phi_hat, int n, const Matrix& a,
                          const Vector& u, const Vector& v, const std::vector<Vector>& xs,
                          const std::vector<Vector>& ys);

/// Same contraction through the slice recursion.
Complex recursive_walk_element(const WalkRun& run, const Matrix& a, const Vector& u,
                               const Vector& v, const std::vector<Vector>& xs,
                               const std::vector<Vector>& ys);

/// Per-step operator U satisfies U U* = U* U = I to 1e-11.  Throws
/// std::invalid_argument unless the walk is of right-multiplication or
/// conjugation kind.
bool walk_unitarity_check(const WalkRun& run);

/// max(||U U* - I||_F, ||U* U - I||_F) for the per-step operator.
double walk_unitarity_defect(const WalkRun& run);

}  // namespace qrwt
