#include "resform/homogenize.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "resform/threading.hpp"

namespace resform {

namespace {
constexpr double kClampRel = 1e-12;   // roundoff clamp, relative to trace norm
constexpr double kRejectRel = 1e-10;  // beyond this the sample is discarded
}  // namespace

QMatrix QMatrix::from_conductances(const Eigen::MatrixXd& offdiag) {
  const int k = static_cast<int>(offdiag.rows());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i != j) m(i, j) = 0.5 * (offdiag(i, j) + offdiag(j, i));
    }
    m(i, i) = 0.0;
  }
  for (int i = 0; i < k; ++i) m(i, i) = -m.row(i).sum();
  return QMatrix(std::move(m));
}

QMatrix QMatrix::uniform(int size, double c) {
  Eigen::MatrixXd off = Eigen::MatrixXd::Constant(size, size, c);
  return from_conductances(off);
}

bool QMatrix::in_q(double tol) const {
  double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > tol * scale) return false;
  return m_.rowwise().sum().cwiseAbs().maxCoeff() <= tol * scale;
}

bool QMatrix::in_qm(double tol) const {
  if (!in_q(tol)) return false;
  double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  for (int i = 0; i < size(); ++i) {
    for (int j = 0; j < size(); ++j) {
      if (i != j && m_(i, j) < -tol * scale) return false;
    }
  }
  return true;
}

bool QMatrix::in_int_qm(double tol) const {
  if (!in_q(tol)) return false;
  double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  for (int i = 0; i < size(); ++i) {
    for (int j = 0; j < size(); ++j) {
      if (i != j && m_(i, j) <= tol * scale) return false;
    }
  }
  return true;
}

bool QMatrix::irreducible(double tol) const {
  if (!in_q(tol)) return false;
  // The form vanishes only on constants iff the second-smallest eigenvalue of
  // -Q is positive.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-0.5 * (m_ + m_.transpose()));
  double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  return es.eigenvalues()[1] > tol * scale;
}

namespace {

// Level-n assembly on boundary-corner images only. Returns the dense
// Laplacian, the V0 indices (first |V0| slots by construction) and the vertex
// count.
struct CellAssembly {
  Eigen::MatrixXd laplacian;
  std::vector<std::vector<int>> cell_vertices;  // local corner ids per cell
  int v0_count = 0;
};

CellAssembly assemble(const FractalScheme& scheme, int level,
                      std::span<const QMatrix> per_cell) {
  scheme.validate();
  const int k = scheme.boundary_count;
  std::int64_t cell_count = 1;
  for (int i = 0; i < level; ++i) cell_count *= scheme.map_count;
  if (static_cast<std::int64_t>(per_cell.size()) != cell_count) {
    throw std::invalid_argument("trace_to_boundary: one QMatrix per cell required");
  }
  for (const QMatrix& q : per_cell) {
    if (q.size() != k) throw std::invalid_argument("trace_to_boundary: QMatrix size != |V0|");
    if (!q.in_qm(1e-9)) {
      throw std::invalid_argument("trace_to_boundary: assignment outside QM");
    }
  }

  // Exact integer keys, as in the graph builder, restricted to corners.
  std::int64_t stride = 1;
  for (int i = 0; i < level; ++i) stride *= scheme.beta;
  auto key_of = [&](const std::vector<std::uint8_t>& word, int corner) {
    std::array<std::int64_t, 2> key = scheme.template_vertices[corner];
    std::int64_t s = 1;
    for (int i = static_cast<int>(word.size()) - 1; i >= 0; --i) {
      key[0] += s * scheme.offsets[word[i] - 1][0];
      key[1] += s * scheme.offsets[word[i] - 1][1];
      s *= scheme.beta;
    }
    return (static_cast<std::uint64_t>(key[0]) << 32) | static_cast<std::uint64_t>(key[1]);
  };

  std::unordered_map<std::uint64_t, int> ids;
  ids.reserve(per_cell.size() * k);
  // Reserve the first k ids for V0 so the Schur block is contiguous.
  for (int j = 0; j < k; ++j) {
    std::array<std::int64_t, 2> t = scheme.template_vertices[j];
    std::uint64_t key = (static_cast<std::uint64_t>(t[0] * stride) << 32) |
                        static_cast<std::uint64_t>(t[1] * stride);
    ids.emplace(key, j);
  }

  CellAssembly out;
  out.v0_count = k;
  out.cell_vertices.resize(per_cell.size());
  std::vector<std::uint8_t> word(level, 1);
  std::size_t cell = 0;
  bool more = true;
  while (more) {
    auto& local = out.cell_vertices[cell];
    local.resize(k);
    for (int j = 0; j < k; ++j) {
      auto [it, inserted] = ids.try_emplace(key_of(word, j), static_cast<int>(ids.size()));
      local[j] = it->second;
    }
    ++cell;
    if (level == 0 || cell >= per_cell.size()) {
      more = false;
    } else {
      for (int i = level - 1; i >= 0; --i) {
        if (word[i] < scheme.map_count) {
          ++word[i];
          std::fill(word.begin() + i + 1, word.end(), 1);
          break;
        }
      }
    }
  }

  const int n = static_cast<int>(ids.size());
  out.laplacian = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t c = 0; c < per_cell.size(); ++c) {
    const auto& local = out.cell_vertices[c];
    const Eigen::MatrixXd& q = per_cell[c].matrix();
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) {
        double cond = std::max(0.0, q(i, j));
        if (cond <= 0.0) continue;
        int a = local[i], b = local[j];
        out.laplacian(a, b) -= cond;
        out.laplacian(b, a) -= cond;
        out.laplacian(a, a) += cond;
        out.laplacian(b, b) += cond;
      }
    }
  }

  // Connectivity of the assembly (BFS over nonzero couplings).
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int visited = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w = 0; w < n; ++w) {
      if (!seen[w] && out.laplacian(v, w) < 0.0) {
        seen[w] = 1;
        ++visited;
        stack.push_back(w);
      }
    }
  }
  if (visited != n) {
    throw std::invalid_argument("trace_to_boundary: assembled network is disconnected");
  }
  return out;
}

}  // namespace

QMatrix trace_to_boundary(const FractalScheme& scheme, int level,
                          std::span<const QMatrix> per_cell, TraceDiagnostics* diag) {
  CellAssembly asmb = assemble(scheme, level, per_cell);
  const int k = asmb.v0_count;
  const int n = static_cast<int>(asmb.laplacian.rows());
  const int m = n - k;

  Eigen::MatrixXd schur = asmb.laplacian.topLeftCorner(k, k);
  if (m > 0) {
    Eigen::MatrixXd l_ke = asmb.laplacian.topRightCorner(k, m);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(asmb.laplacian.bottomRightCorner(m, m));
    if (ldlt.info() != Eigen::Success) {
      throw std::runtime_error("trace_to_boundary: interior block factorization failed");
    }
    schur -= l_ke * ldlt.solve(l_ke.transpose());
  }

  Eigen::MatrixXd q = -schur;
  double clamp_scale = std::max(1.0, -q.trace());
  TraceDiagnostics local;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      if (q(i, j) < 0.0) {
        local.worst_negative = std::min(local.worst_negative, q(i, j));
        if (q(i, j) >= -kClampRel * clamp_scale) {
          q(i, j) = 0.0;
          ++local.clamped;
        }
      }
    }
  }
  // Re-close the row sums after clamping.
  for (int i = 0; i < k; ++i) {
    q(i, i) = 0.0;
    q(i, i) = -q.row(i).sum();
  }
  if (diag) *diag = local;
  return QMatrix(std::move(q));
}

QMatrix renormalize(const QMatrix& q, const FractalScheme& scheme, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("renormalize: rho must be positive");
  if (!q.in_qm(1e-9)) throw std::invalid_argument("renormalize: Q outside QM");
  std::vector<QMatrix> cells(scheme.map_count, q);
  return trace_to_boundary(scheme, 1, cells) * rho;
}

FixedPointResult fixed_point(const FractalScheme& scheme, const QMatrix& init,
                             double tol, int max_iter) {
  if (!init.irreducible(1e-10)) {
    throw std::invalid_argument("fixed_point: initial Q must be irreducible");
  }
  FixedPointResult res;
  QMatrix q = init * (1.0 / init.trace_norm());
  for (int it = 0; it < max_iter; ++it) {
    std::vector<QMatrix> cells(scheme.map_count, q);
    QMatrix traced = trace_to_boundary(scheme, 1, cells);
    double rho = q.trace_norm() / traced.trace_norm();
    res.rho_history.push_back(rho);
    QMatrix next = traced * rho;  // unit trace norm again
    double residual = (next - q).frobenius();
    q = next;
    res.iterations = it + 1;
    res.residual = residual;
    if (residual <= tol) {
      res.q = q;
      res.rho = rho;
      return res;
    }
  }
  std::ostringstream msg;
  msg << "fixed_point: no convergence in " << max_iter
      << " iterations; rho history:";
  for (double r : res.rho_history) msg << " " << r;
  throw std::runtime_error(msg.str());
}

HarmonicMatrices harmonic_matrices(const FractalScheme& scheme, const QMatrix& qstar) {
  if (!qstar.irreducible(1e-10)) {
    throw std::invalid_argument("harmonic_matrices: Q must be irreducible");
  }
  std::vector<QMatrix> cells(scheme.map_count, qstar);
  CellAssembly asmb = assemble(scheme, 1, cells);
  const int k = asmb.v0_count;
  const int n = static_cast<int>(asmb.laplacian.rows());
  const int m = n - k;

  // Hitting distribution of V0: harmonic extension rows. Interior block of
  // an irreducible assembly is nonsingular.
  Eigen::MatrixXd h(n, k);
  h.topRows(k) = Eigen::MatrixXd::Identity(k, k);
  if (m > 0) {
    Eigen::MatrixXd l_ie = asmb.laplacian.bottomLeftCorner(m, k);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(asmb.laplacian.bottomRightCorner(m, m));
    if (ldlt.info() != Eigen::Success) {
      throw std::invalid_argument("harmonic_matrices: reducible Q (singular interior)");
    }
    h.bottomRows(m) = -ldlt.solve(l_ie);
  }

  HarmonicMatrices out;
  out.a.reserve(scheme.map_count);
  for (int map = 0; map < scheme.map_count; ++map) {
    Eigen::MatrixXd a(k, k);
    for (int i = 0; i < k; ++i) a.row(i) = h.row(asmb.cell_vertices[map][i]);
    out.a.push_back(std::move(a));
  }
  return out;
}

QMatrix linearized_map(const QMatrix& q, const HarmonicMatrices& harmonics, double rho) {
  if (harmonics.a.empty()) throw std::invalid_argument("linearized_map: empty harmonics");
  const int k = q.size();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(k, k);
  for (const Eigen::MatrixXd& a : harmonics.a) {
    acc += a.transpose() * q.matrix() * a;
  }
  return QMatrix(rho * acc);
}

RandomIterateStats random_iterate(const FractalScheme& scheme, int level,
                                  const ConductanceLaw& law, int samples,
                                  std::uint64_t seed, bool exchangeable_within_cell,
                                  std::optional<double> rho_opt) {
  if (samples < 1) throw std::invalid_argument("random_iterate: need samples >= 1");
  const int k = scheme.boundary_count;
  double rho = rho_opt ? *rho_opt
                       : fixed_point(scheme, QMatrix::uniform(k, 1.0), 1e-12, 256).rho;
  double rho_n = std::pow(rho, level);

  std::int64_t cell_count = 1;
  for (int i = 0; i < level; ++i) cell_count *= scheme.map_count;
  const int pair_count = k * (k - 1) / 2;

  std::vector<Eigen::MatrixXd> results(samples);
  std::vector<char> rejected(samples, 0);
  parallel_for(samples, [&](int s) {
    CounterRng rng(seed, static_cast<std::uint64_t>(s));
    std::vector<QMatrix> cells;
    cells.reserve(cell_count);
    Eigen::MatrixXd off(k, k);
    std::vector<double> draw(pair_count);
    for (std::int64_t c = 0; c < cell_count; ++c) {
      for (double& w : draw) w = law.sample(rng);
      if (exchangeable_within_cell) {
        for (int t = pair_count - 1; t > 0; --t) {
          int pick = static_cast<int>(rng.uniform() * (t + 1));
          std::swap(draw[t], draw[pick]);
        }
      }
      int idx = 0;
      off.setZero();
      for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
          off(i, j) = off(j, i) = draw[idx++];
        }
      }
      cells.push_back(QMatrix::from_conductances(off));
    }
    TraceDiagnostics diag;
    QMatrix traced = trace_to_boundary(scheme, level, cells, &diag);
    double scale = std::max(1.0, traced.trace_norm());
    if (diag.worst_negative < -kRejectRel * scale) {
      rejected[s] = 1;
      return;
    }
    results[s] = rho_n * traced.matrix();
  });

  RandomIterateStats stats;
  stats.total = samples;
  stats.rho = rho;
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(k, k);
  int accepted = 0;
  for (int s = 0; s < samples; ++s) {
    if (rejected[s]) {
      ++stats.rejected;
      continue;
    }
    mean += results[s];
    ++accepted;
  }
  if (accepted == 0) throw std::runtime_error("random_iterate: all samples rejected");
  if (stats.rejected > 0.001 * samples) {
    throw std::runtime_error("random_iterate: rejection rate above 0.1% (" +
                             std::to_string(stats.rejected) + "/" +
                             std::to_string(samples) + ")");
  }
  mean /= accepted;
  stats.mean = QMatrix(mean);

  stats.entry_variance = Eigen::MatrixXd::Zero(k, k);
  stats.offdiag_covariance = Eigen::MatrixXd::Zero(pair_count, pair_count);
  Eigen::VectorXd mean_vec(pair_count);
  {
    int idx = 0;
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) mean_vec[idx++] = mean(i, j);
    }
  }
  for (int s = 0; s < samples; ++s) {
    if (rejected[s]) continue;
    Eigen::MatrixXd d = results[s] - mean;
    stats.entry_variance += d.cwiseProduct(d);
    Eigen::VectorXd v(pair_count);
    int idx = 0;
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) v[idx++] = results[s](i, j);
    }
    v -= mean_vec;
    stats.offdiag_covariance += v * v.transpose();
    stats.sample_norms.push_back(results[s].norm());
  }
  double denom = std::max(1, accepted - 1);
  stats.entry_variance /= denom;
  stats.offdiag_covariance /= denom;
  return stats;
}

}  // namespace resform
