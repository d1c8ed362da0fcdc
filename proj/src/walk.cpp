#include "qrwt/walk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qrwt {

namespace {

constexpr double kOmegaTol = 1e-12;
constexpr double kUnitarityTol = 1e-11;
constexpr double kStepSlack = 1e-9;

void require_same_dim(const StepFunction& f, const StepFunction& g) {
  if (f.dim != g.dim) throw std::invalid_argument("step functions live in different spaces");
}

double overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

}  // namespace

StepFunction StepFunction::zero(Index dim) {
  StepFunction f;
  f.dim = dim;
  return f;
}

StepFunction StepFunction::make(std::vector<double> breakpoints, std::vector<Vector> values) {
  if (breakpoints.empty() || breakpoints.front() != 0.0)
    throw std::invalid_argument("step function: breakpoints must start at 0");
  if (breakpoints.size() != values.size() + 1)
    throw std::invalid_argument("step function: need one value per interval");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i] > breakpoints[i - 1]))
      throw std::invalid_argument("step function: breakpoints must increase strictly");
  StepFunction f;
  f.dim = values.empty() ? 0 : values.front().size();
  for (const Vector& x : values)
    if (x.size() != f.dim) throw std::invalid_argument("step function: values differ in length");
  f.breakpoints = std::move(breakpoints);
  f.values = std::move(values);
  return f;
}

StepFunction StepFunction::from_mu(const GnsData& g, std::vector<double> breakpoints,
                                   const std::vector<Vector>& coords) {
  std::vector<Vector> values;
  values.reserve(coords.size());
  for (const Vector& c : coords) values.push_back(from_mu_coordinates(g, c));
  StepFunction f = make(std::move(breakpoints), std::move(values));
  f.dim = g.khat_dim();
  return f;
}

Vector StepFunction::value_at(double t) const {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (t >= breakpoints[i] && t < breakpoints[i + 1]) return values[i];
  return Vector::Zero(dim);
}

void StepFunction::validate(const GnsData& g) const {
  if (breakpoints.empty() || breakpoints.front() != 0.0)
    throw std::invalid_argument("step function: breakpoints must start at 0");
  if (breakpoints.size() != values.size() + 1)
    throw std::invalid_argument("step function: need one value per interval");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i] > breakpoints[i - 1]))
      throw std::invalid_argument("step function: breakpoints must increase strictly");
  if (dim != g.khat_dim()) throw std::invalid_argument("step function: wrong dimension");
  for (const Vector& x : values) {
    if (x.size() != dim) throw std::invalid_argument("step function: wrong dimension");
    if (std::abs(g.omega.dot(x)) > kOmegaTol)
      throw std::invalid_argument("step function: value has a component along Omega");
  }
}

Complex integral_inner(const StepFunction& f, const StepFunction& g) {
  require_same_dim(f, g);
  Complex sum = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i)
    for (std::size_t j = 0; j < g.values.size(); ++j) {
      const double len =
          overlap(f.breakpoints[i], f.breakpoints[i + 1], g.breakpoints[j], g.breakpoints[j + 1]);
      if (len > 0.0) sum += len * f.values[i].dot(g.values[j]);
    }
  return sum;
}

Complex exponential_inner(const StepFunction& f, const StepFunction& g) {
  return std::exp(integral_inner(f, g));
}

std::vector<Vector> dtau_coeffs(const StepFunction& f, double tau, Index n_max) {
  if (!(tau > 0.0)) throw std::invalid_argument("dtau_coeffs: tau must be positive");
  if (n_max < 0) throw std::invalid_argument("dtau_coeffs: n_max must be non-negative");
  const double scale = 1.0 / std::sqrt(tau);
  std::vector<Vector> out(n_max, Vector::Zero(f.dim));
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double lo = f.breakpoints[i];
    const double hi = f.breakpoints[i + 1];
    const Index first = static_cast<Index>(std::floor(lo / tau));
    for (Index n = std::max<Index>(first, 0); n < n_max; ++n) {
      const double s0 = static_cast<double>(n) * tau;
      if (s0 >= hi) break;
      const double len = overlap(s0, s0 + tau, lo, hi);
      if (len > 0.0) out[n] += (scale * len) * f.values[i];
    }
  }
  return out;
}

std::vector<double> merged_breakpoints(const StepFunction& f, const StepFunction& g, double t) {
  std::vector<double> points{0.0};
  for (double s : f.breakpoints)
    if (s > 0.0 && s < t) points.push_back(s);
  for (double s : g.breakpoints)
    if (s > 0.0 && s < t) points.push_back(s);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (t > 0.0) points.push_back(t);
  return points;
}

SliceTable::SliceTable(const Superoperator& map, Index inner_dim)
    : system_dim_(map.in_shape().rows), inner_dim_(inner_dim) {
  const Index dh = system_dim_;
  const Index big = dh * inner_dim;
  if (map.in_shape() != OperatorShape::square(dh) || map.out_shape() != OperatorShape::square(big))
    throw std::invalid_argument("SliceTable: map must send B(h) into B(h (x) K)");
  const Matrix& m = map.matrix();
  slices_.assign(inner_dim * inner_dim, Matrix(dh * dh, dh * dh));
  for (Index alpha = 0; alpha < inner_dim; ++alpha)
    for (Index beta = 0; beta < inner_dim; ++beta) {
      Matrix& s = slices_[alpha * inner_dim + beta];
      for (Index j = 0; j < dh; ++j)
        for (Index i = 0; i < dh; ++i)
          s.row(i + dh * j) = m.row((i * inner_dim + alpha) + big * (j * inner_dim + beta));
    }
}

Matrix SliceTable::combine(const Vector& x, const Vector& y) const {
  if (x.size() != inner_dim_ || y.size() != inner_dim_)
    throw std::invalid_argument("SliceTable: slice vectors have the wrong length");
  Matrix out = Matrix::Zero(system_dim_ * system_dim_, system_dim_ * system_dim_);
  for (Index alpha = 0; alpha < inner_dim_; ++alpha) {
    const Complex xa = std::conj(x(alpha));
    if (xa == 0.0) continue;
    for (Index beta = 0; beta < inner_dim_; ++beta) {
      const Complex w = xa * y(beta);
      if (w != 0.0) out += w * slices_[alpha * inner_dim_ + beta];
    }
  }
  return out;
}

WalkRun::WalkRun(const WalkGenerator& w, const GnsData& g, double tau)
    : WalkRun(ampliate_generator(w, g), g, tau) {
  kind_ = w.kind;
  factor_ = w.factor;
}

WalkRun::WalkRun(const Superoperator& phi_hat, const GnsData& g, double tau)
    : tau_(tau), phi_hat_(phi_hat), table_(phi_hat, g.khat_dim()), omega_(g.omega) {
  if (!(tau > 0.0)) throw std::invalid_argument("WalkRun: tau must be positive");
}

Index WalkRun::steps(double t) const {
  if (t < 0.0) throw std::invalid_argument("walk: t must be non-negative");
  return static_cast<Index>(std::floor(t / tau_ + kStepSlack));
}

Complex walk_matrix_element(const WalkRun& run, const Matrix& a, const Vector& u,
                            const Vector& v, const StepFunction& f, const StepFunction& g,
                            double t) {
  require_same_dim(f, g);
  const Index dh = run.system_dim();
  if (a.rows() != dh || a.cols() != dh || u.size() != dh || v.size() != dh)
    throw std::invalid_argument("walk_matrix_element: dimension mismatch");
  if (f.dim != run.omega().size()) throw std::invalid_argument("walk: step function dimension");
  const Index n = run.steps(t);
  const double tau = run.tau();
  const Index tail_end = static_cast<Index>(
      std::ceil(std::max(f.support_end(), g.support_end()) / tau)) + 1;
  const Index n_max = std::max(n, tail_end);
  const std::vector<Vector> fc = dtau_coeffs(f, tau, n_max);
  const std::vector<Vector> gc = dtau_coeffs(g, tau, n_max);

  Complex tail = 1.0;
  for (Index m = n; m < n_max; ++m)
    tail *= (run.omega() + fc[m]).dot(run.omega() + gc[m]);

  Vector w = vec(a);
  Matrix step;
  for (Index m = n - 1; m >= 0; --m) {
    const bool reuse = m + 1 < n && fc[m] == fc[m + 1] && gc[m] == gc[m + 1];
    if (!reuse) step = run.step_map(run.omega() + fc[m], run.omega() + gc[m]);
    w = step * w;
  }
  return u.dot(unvec(w, OperatorShape::square(dh)) * v) * tail;
}

Complex recursive_walk_element(const WalkRun& run, const Matrix& a, const Vector& u,
                               const Vector& v, const std::vector<Vector>& xs,
                               const std::vector<Vector>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("walk: slot lists differ in length");
  const Index dh = run.system_dim();
  Vector w = vec(a);
  for (std::size_t m = xs.size(); m-- > 0;) w = run.step_map(xs[m], ys[m]) * w;
  return u.dot(unvec(w, OperatorShape::square(dh)) * v);
}

Complex dense_walk_oracle(const Superoperator& phi_hat, int n, const Matrix& a,
                          const Vector& u, const Vector& v, const std::vector<Vector>& xs,
                          const std::vector<Vector>& ys) {
  if (n < 0 || n > 3) throw std::invalid_argument("dense_walk_oracle: n must lie in 0..3");
  if (xs.size() != static_cast<std::size_t>(n) || ys.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("dense_walk_oracle: need one slot vector per step");
  const Index dh = phi_hat.in_shape().rows;
  const Index k = phi_hat.out_shape().rows / dh;

  // table[p + dh q] = Phi^(m)(e_pq) on h (x) khat^{(x) m}, slots left to right.
  std::vector<Matrix> table(dh * dh);
  for (Index q = 0; q < dh; ++q)
    for (Index p = 0; p < dh; ++p) {
      table[p + dh * q] = Matrix::Zero(dh, dh);
      table[p + dh * q](p, q) = 1.0;
    }
  std::vector<Matrix> images(dh * dh);
  for (Index idx = 0; idx < dh * dh; ++idx) images[idx] = unvec(phi_hat.matrix().col(idx), phi_hat.out_shape());

  for (int m = 1; m <= n; ++m) {
    const Index inner = table[0].rows();
    std::vector<Matrix> next(dh * dh, Matrix::Zero(inner * k, inner * k));
    for (Index idx = 0; idx < dh * dh; ++idx) {
      const Matrix& image = images[idx];
      for (Index alpha = 0; alpha < k; ++alpha)
        for (Index beta = 0; beta < k; ++beta) {
          Matrix block = Matrix::Zero(inner, inner);
          for (Index s = 0; s < dh; ++s)
            for (Index r = 0; r < dh; ++r) {
              const Complex c = image(r * k + alpha, s * k + beta);
              if (c != 0.0) block += c * table[r + dh * s];
            }
          Matrix& out = next[idx];
          for (Index j = 0; j < inner; ++j)
            for (Index i = 0; i < inner; ++i) out(i * k + alpha, j * k + beta) += block(i, j);
        }
    }
    table = std::move(next);
  }

  Matrix result = Matrix::Zero(table[0].rows(), table[0].cols());
  for (Index q = 0; q < dh; ++q)
    for (Index p = 0; p < dh; ++p)
      if (a(p, q) != 0.0) result += a(p, q) * table[p + dh * q];

  Vector left = u;
  Vector right = v;
  for (int m = 0; m < n; ++m) {
    left = kron(left, xs[m]);
    right = kron(right, ys[m]);
  }
  return left.dot(result * right);
}

double walk_unitarity_defect(const WalkRun& run) {
  if (run.kind() != GeneratorKind::RightMultiplication && run.kind() != GeneratorKind::Conjugation)
    throw std::invalid_argument("walk_unitarity_check: walk is not Hamiltonian-based");
  const Matrix& u = run.factor();
  const Matrix id = identity(u.rows());
  return std::max((u * u.adjoint() - id).norm(), (u.adjoint() * u - id).norm());
}

bool walk_unitarity_check(const WalkRun& run) {
  return walk_unitarity_defect(run) <= kUnitarityTol;
}

}  // namespace qrwt
