#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>
#include <vector>

#include "resform/network.hpp"

namespace resform {

// L(x,y) = -c(x,y) off the diagonal, L(x,x) = sum_y c(x,y). Symmetric,
// positive semidefinite, kernel = constants on a connected network.
Eigen::SparseMatrix<double> weighted_laplacian(const ResistanceNetwork& net);

// Solves L v = b with one vertex grounded (v[ground] = 0, b[ground] ignored).
// Direct Cholesky-type factorization up to 5e3 vertices, diagonally
// preconditioned conjugate gradient above (residual 1e-12).
class LaplacianSolver {
 public:
  LaplacianSolver(const ResistanceNetwork& net, int ground);
  ~LaplacianSolver();
  LaplacianSolver(LaplacianSolver&&) noexcept;

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  int ground() const { return ground_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int ground_;
};

double effective_resistance(const ResistanceNetwork& net, int x, int y);

// All-pairs effective resistances, R(x,y) in ohms.
Eigen::MatrixXd resistance_matrix(const ResistanceNetwork& net);

// Green function of the walk killed at `kill`: inverse of the Laplacian
// restricted to V \ {kill}, returned as a full matrix with zero row/column at
// the killed vertex. g(x,x) = R(kill,x).
Eigen::MatrixXd green_killed(const ResistanceNetwork& net, int kill);

// One-potential density u(x,y) = [(I - Delta)^{-1}]_{xy} / mu(y), which for
// the generator Delta = -diag(mu)^{-1} L collapses to (diag(mu) + L)^{-1};
// symmetric. E_x[exp(-tau_y)] = u(x,y)/u(y,y).
Eigen::MatrixXd potential_density(const ResistanceNetwork& net);

// Transition density p_t(x,y) = [exp(t Delta)]_{xy} / mu(y), computed from
// the spectral decomposition of the symmetrised generator. Cache one of these
// to evaluate many times t.
class HeatKernel {
 public:
  explicit HeatKernel(const ResistanceNetwork& net);
  Eigen::MatrixXd at(double t) const;

 private:
  Eigen::VectorXd inv_sqrt_mu_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
};

Eigen::MatrixXd heat_kernel(const ResistanceNetwork& net, double t);

struct SchurResult {
  ResistanceNetwork network;
  std::vector<int> kept;    // original ids, ascending; network vertex i = kept[i]
  int clamped_count = 0;    // negative off-diagonal roundoff entries zeroed
  double worst_negative = 0.0;
};

// Trace of the Dirichlet form onto `keep`: conductances from the Schur
// complement of the weighted Laplacian eliminating the rest. Preserves
// pairwise effective resistance among kept vertices.
SchurResult schur_trace(const ResistanceNetwork& net, const std::vector<int>& keep,
                        const VertexMeasure& new_measure);

// Mean hitting times (E_x tau_y, E_y tau_x); their sum is R(x,y) mu(F).
std::pair<double, double> exact_commute_time(const ResistanceNetwork& net, int x, int y);

}  // namespace resform
