#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "resform/environments.hpp"
#include "resform/fractal.hpp"
#include "resform/rng.hpp"

namespace resform {

// Symmetric row-sum-zero conductance matrix on the boundary set V0.
// Off-diagonal entries are conductances; the associated energy is
// S_Q(xi,xi) = -xi' Q xi = (1/2) sum Q_ij (xi_i - xi_j)^2.
class QMatrix {
 public:
  QMatrix() = default;
  explicit QMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {}

  // Row-sum-zero completion of the given nonnegative off-diagonal part.
  static QMatrix from_conductances(const Eigen::MatrixXd& offdiag);
  // All off-diagonals equal to c.
  static QMatrix uniform(int size, double c);

  const Eigen::MatrixXd& matrix() const { return m_; }
  int size() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }

  double energy(const Eigen::VectorXd& xi) const { return -xi.dot(m_ * xi); }
  double trace_norm() const { return -m_.trace(); }
  double frobenius() const { return m_.norm(); }

  // Membership predicates, tolerances relative to max(1, ||Q||_inf).
  bool in_q(double tol = 1e-10) const;
  bool in_qm(double tol = 1e-10) const;
  bool in_int_qm(double tol = 1e-10) const;
  bool irreducible(double tol = 1e-10) const;

  QMatrix operator+(const QMatrix& o) const { return QMatrix(m_ + o.m_); }
  QMatrix operator-(const QMatrix& o) const { return QMatrix(m_ - o.m_); }
  QMatrix operator*(double s) const { return QMatrix(m_ * s); }

 private:
  Eigen::MatrixXd m_;
};

struct TraceDiagnostics {
  int clamped = 0;            // tiny negative off-diagonals zeroed
  double worst_negative = 0;  // most negative raw Schur conductance seen
};

// Assemble the level-n network whose cell conductances are the assigned Q
// off-diagonals (cells in lexicographic address order, complete graph on each
// cell's boundary corners), then Schur-complement down to V0. Unscaled.
QMatrix trace_to_boundary(const FractalScheme& scheme, int level,
                          std::span<const QMatrix> per_cell,
                          TraceDiagnostics* diag = nullptr);

// One level with a constant assignment, rescaled by rho: the renormalization
// map Phi. At the fixed point, renormalize(Q*, scheme, rho*) == Q*.
QMatrix renormalize(const QMatrix& q, const FractalScheme& scheme, double rho);

struct FixedPointResult {
  QMatrix q;          // unit trace-norm representative
  double rho = 0.0;   // resistance scale factor: Phi~(Q*) = Q*/rho
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> rho_history;
};

// Iterates the one-level trace with trace-norm renormalization until
// ||rho Phi~(Q) - Q|| <= tol. Throws on non-convergence with the iterate
// history attached to the message.
FixedPointResult fixed_point(const FractalScheme& scheme, const QMatrix& init,
                             double tol = 1e-12, int max_iter = 256);

// Hitting distributions of the level-1 Q*-network: A_k(i,j) is the
// probability the chain started at Psi_k(a_i) first meets V0 at a_j. Rows are
// stochastic; boundary-map rows are unit vectors.
struct HarmonicMatrices {
  std::vector<Eigen::MatrixXd> a;  // one |V0| x |V0| matrix per map
};

HarmonicMatrices harmonic_matrices(const FractalScheme& scheme, const QMatrix& qstar);

// Linearization of the renormalization at Q*: H(Q) = rho sum_k A_k' Q A_k.
// Fixes Q* and dominates the nonlinear map as a form.
QMatrix linearized_map(const QMatrix& q, const HarmonicMatrices& harmonics, double rho);

struct RandomIterateStats {
  QMatrix mean;
  Eigen::MatrixXd entry_variance;       // per-entry sample variance
  Eigen::MatrixXd offdiag_covariance;   // covariance of the vectorized upper triangle
  std::vector<double> sample_norms;     // Frobenius norm per accepted sample
  int rejected = 0;                     // non-QM traces beyond the clamp tolerance
  int total = 0;
  double rho = 0.0;
};

// Monte Carlo layer for the homogenization statement: per sample, assign
// i.i.d. cell matrices drawn from `law` (i.i.d. entries per cell edge, or
// exchangeable within the cell), compute rho^n * trace_to_boundary at the
// given level, and accumulate statistics. Samples whose trace falls outside
// QM beyond the clamp tolerance are rejected and counted; rates above 0.1%
// throw.
RandomIterateStats random_iterate(const FractalScheme& scheme, int level,
                                  const ConductanceLaw& law, int samples,
                                  std::uint64_t seed,
                                  bool exchangeable_within_cell = false,
                                  std::optional<double> rho = std::nullopt);

}  // namespace resform
