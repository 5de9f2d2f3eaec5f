#include "resform/resistance.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace resform {

namespace {
constexpr int kDirectSolveLimit = 5000;
constexpr double kCgTolerance = 1e-12;
constexpr double kSchurClampTolerance = 1e-12;
}  // namespace

Eigen::SparseMatrix<double> weighted_laplacian(const ResistanceNetwork& net) {
  const int n = net.vertex_count();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(4 * net.edges().size());
  for (const Edge& e : net.edges()) {
    trip.emplace_back(e.u, e.v, -e.conductance);
    trip.emplace_back(e.v, e.u, -e.conductance);
    trip.emplace_back(e.u, e.u, e.conductance);
    trip.emplace_back(e.v, e.v, e.conductance);
  }
  Eigen::SparseMatrix<double> l(n, n);
  l.setFromTriplets(trip.begin(), trip.end());
  return l;
}

struct LaplacianSolver::Impl {
  int n = 0;
  std::vector<int> to_reduced;  // -1 at ground
  std::vector<int> to_full;
  Eigen::SparseMatrix<double> reduced;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> direct;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                           Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  bool use_direct = true;
};

LaplacianSolver::LaplacianSolver(const ResistanceNetwork& net, int ground)
    : impl_(std::make_unique<Impl>()), ground_(ground) {
  const int n = net.vertex_count();
  if (ground < 0 || ground >= n) throw std::invalid_argument("solver: bad ground vertex");
  impl_->n = n;
  impl_->to_reduced.assign(n, -1);
  impl_->to_full.reserve(n - 1);
  for (int v = 0; v < n; ++v) {
    if (v == ground) continue;
    impl_->to_reduced[v] = static_cast<int>(impl_->to_full.size());
    impl_->to_full.push_back(v);
  }
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(4 * net.edges().size());
  for (const Edge& e : net.edges()) {
    int ru = impl_->to_reduced[e.u];
    int rv = impl_->to_reduced[e.v];
    if (ru >= 0) trip.emplace_back(ru, ru, e.conductance);
    if (rv >= 0) trip.emplace_back(rv, rv, e.conductance);
    if (ru >= 0 && rv >= 0) {
      trip.emplace_back(ru, rv, -e.conductance);
      trip.emplace_back(rv, ru, -e.conductance);
    }
  }
  impl_->reduced.resize(n - 1, n - 1);
  impl_->reduced.setFromTriplets(trip.begin(), trip.end());
  impl_->use_direct = n <= kDirectSolveLimit;
  if (impl_->use_direct) {
    impl_->direct.compute(impl_->reduced);
    if (impl_->direct.info() != Eigen::Success) {
      throw std::runtime_error("solver: factorization failed (disconnected network?)");
    }
  } else {
    impl_->cg.setTolerance(kCgTolerance);
    impl_->cg.compute(impl_->reduced);
  }
}

LaplacianSolver::~LaplacianSolver() = default;
LaplacianSolver::LaplacianSolver(LaplacianSolver&&) noexcept = default;

Eigen::VectorXd LaplacianSolver::solve(const Eigen::VectorXd& b) const {
  const int m = static_cast<int>(impl_->to_full.size());
  Eigen::VectorXd rb(m);
  for (int i = 0; i < m; ++i) rb[i] = b[impl_->to_full[i]];
  Eigen::VectorXd rx = impl_->use_direct ? impl_->direct.solve(rb).eval()
                                         : impl_->cg.solve(rb).eval();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(impl_->n);
  for (int i = 0; i < m; ++i) x[impl_->to_full[i]] = rx[i];
  return x;
}

double effective_resistance(const ResistanceNetwork& net, int x, int y) {
  const int n = net.vertex_count();
  if (x < 0 || x >= n || y < 0 || y >= n) {
    throw std::invalid_argument("effective_resistance: vertex out of range");
  }
  if (x == y) return 0.0;
  LaplacianSolver solver(net, y);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b[x] = 1.0;
  b[y] = -1.0;
  Eigen::VectorXd v = solver.solve(b);
  return v[x] - v[y];
}

Eigen::MatrixXd green_killed(const ResistanceNetwork& net, int kill) {
  const int n = net.vertex_count();
  LaplacianSolver solver(net, kill);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int y = 0; y < n; ++y) {
    if (y == kill) continue;
    b[y] = 1.0;
    g.col(y) = solver.solve(b);
    b[y] = 0.0;
  }
  // Symmetrise away factorization roundoff.
  g = ((g + g.transpose()) * 0.5).eval();
  return g;
}

Eigen::MatrixXd resistance_matrix(const ResistanceNetwork& net) {
  const int n = net.vertex_count();
  Eigen::MatrixXd g = green_killed(net, net.root());
  Eigen::MatrixXd r(n, n);
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      r(x, y) = g(x, x) + g(y, y) - 2.0 * g(x, y);
    }
  }
  return r;
}

Eigen::MatrixXd potential_density(const ResistanceNetwork& net) {
  net.require_positive_measure();
  const int n = net.vertex_count();
  Eigen::MatrixXd a = Eigen::MatrixXd(weighted_laplacian(net));
  for (int v = 0; v < n; ++v) a(v, v) += net.measure()[v];
  return a.ldlt().solve(Eigen::MatrixXd::Identity(n, n));
}

HeatKernel::HeatKernel(const ResistanceNetwork& net) {
  net.require_positive_measure();
  const int n = net.vertex_count();
  inv_sqrt_mu_.resize(n);
  for (int v = 0; v < n; ++v) inv_sqrt_mu_[v] = 1.0 / std::sqrt(net.measure()[v]);
  Eigen::MatrixXd s = Eigen::MatrixXd(weighted_laplacian(net));
  s = (inv_sqrt_mu_.asDiagonal() * s * inv_sqrt_mu_.asDiagonal()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  if (es.info() != Eigen::Success) throw std::runtime_error("heat kernel: eigensolver failed");
  eigenvalues_ = es.eigenvalues();
  eigenvectors_ = es.eigenvectors();
}

Eigen::MatrixXd HeatKernel::at(double t) const {
  if (t < 0.0) throw std::invalid_argument("heat kernel: t must be >= 0");
  Eigen::VectorXd w = (-t * eigenvalues_.array()).exp();
  Eigen::MatrixXd core = eigenvectors_ * w.asDiagonal() * eigenvectors_.transpose();
  return inv_sqrt_mu_.asDiagonal() * core * inv_sqrt_mu_.asDiagonal();
}

Eigen::MatrixXd heat_kernel(const ResistanceNetwork& net, double t) {
  return HeatKernel(net).at(t);
}

SchurResult schur_trace(const ResistanceNetwork& net, const std::vector<int>& keep,
                        const VertexMeasure& new_measure) {
  const int n = net.vertex_count();
  if (keep.empty()) throw std::invalid_argument("schur_trace: keep set is empty");
  std::vector<int> kept = keep;
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  if (kept.front() < 0 || kept.back() >= n) {
    throw std::invalid_argument("schur_trace: keep vertex out of range");
  }
  if (static_cast<int>(new_measure.weights.size()) != static_cast<int>(kept.size())) {
    throw std::invalid_argument("schur_trace: measure size must match keep set");
  }
  for (double w : new_measure.weights) {
    if (!(w > 0.0)) throw std::invalid_argument("schur_trace: measure must be positive on keep");
  }

  const int k = static_cast<int>(kept.size());
  std::vector<int> role(n, -1);  // reduced index among kept, or ~index among eliminated
  for (int i = 0; i < k; ++i) role[kept[i]] = i;
  std::vector<int> elim;
  for (int v = 0; v < n; ++v) {
    if (role[v] < 0) {
      role[v] = ~static_cast<int>(elim.size());
      elim.push_back(v);
    }
  }
  const int m = static_cast<int>(elim.size());

  Eigen::MatrixXd l_kk = Eigen::MatrixXd::Zero(k, k);
  Eigen::MatrixXd l_ke = Eigen::MatrixXd::Zero(k, m);
  Eigen::MatrixXd l_ee = Eigen::MatrixXd::Zero(m, m);
  auto add = [&](int u, int v, double c) {
    bool uk = role[u] >= 0, vk = role[v] >= 0;
    int iu = uk ? role[u] : ~role[u];
    int iv = vk ? role[v] : ~role[v];
    if (uk && vk) {
      l_kk(iu, iv) -= c;
      l_kk(iv, iu) -= c;
      l_kk(iu, iu) += c;
      l_kk(iv, iv) += c;
    } else if (!uk && !vk) {
      l_ee(iu, iv) -= c;
      l_ee(iv, iu) -= c;
      l_ee(iu, iu) += c;
      l_ee(iv, iv) += c;
    } else {
      if (!uk) {
        std::swap(iu, iv);  // iu kept, iv eliminated
      }
      l_ke(iu, iv) -= c;
      l_kk(iu, iu) += c;
      l_ee(iv, iv) += c;
    }
  };
  for (const Edge& e : net.edges()) add(e.u, e.v, e.conductance);

  Eigen::MatrixXd schur = l_kk;
  if (m > 0) {
    // The elimination block of a connected positive-conductance network is
    // strictly diagonally dominant somewhere along every component, hence
    // nonsingular.
    Eigen::LDLT<Eigen::MatrixXd> ldlt(l_ee);
    if (ldlt.info() != Eigen::Success) {
      throw std::runtime_error("schur_trace: elimination block is singular");
    }
    schur -= l_ke * ldlt.solve(l_ke.transpose());
  }

  SchurResult result{ResistanceNetwork(1, {}, {1.0}, 0), kept, 0, 0.0};
  std::vector<Edge> edges;
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      double c = -0.5 * (schur(i, j) + schur(j, i));
      if (c < 0.0) {
        result.worst_negative = std::min(result.worst_negative, c);
        if (c > -kSchurClampTolerance) ++result.clamped_count;
        c = 0.0;
      }
      if (c > 0.0) edges.push_back({i, j, c});
    }
  }
  std::vector<std::array<double, 2>> coords;
  if (net.has_coords()) {
    coords.reserve(k);
    for (int v : kept) coords.push_back(net.coords()[v]);
  }
  int root = 0;
  for (int i = 0; i < k; ++i) {
    if (kept[i] == net.root()) root = i;
  }
  result.network = ResistanceNetwork(k, std::move(edges), new_measure.weights, root,
                                     std::move(coords));
  return result;
}

std::pair<double, double> exact_commute_time(const ResistanceNetwork& net, int x, int y) {
  if (x == y) return {0.0, 0.0};
  const int n = net.vertex_count();
  Eigen::VectorXd mu(n);
  for (int v = 0; v < n; ++v) mu[v] = net.measure()[v];
  // E_. tau_y solves L h = mu with h(y) = 0: the occupation-density identity
  // E_x tau_y = sum_z g_y(x,z) mu(z) in one grounded solve.
  LaplacianSolver at_y(net, y);
  LaplacianSolver at_x(net, x);
  double exy = at_y.solve(mu)[x];
  double eyx = at_x.solve(mu)[y];
  return {exy, eyx};
}

}  // namespace resform
