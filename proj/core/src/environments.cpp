#include "resform/environments.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "resform/resistance.hpp"

namespace resform {

ConductanceLaw ConductanceLaw::constant(double v) {
  ConductanceLaw law;
  law.family = Family::Constant;
  law.value = v;
  return law;
}

ConductanceLaw ConductanceLaw::pareto(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("pareto: alpha must be positive");
  ConductanceLaw law;
  law.family = Family::Pareto;
  law.alpha = alpha;
  return law;
}

ConductanceLaw ConductanceLaw::lognormal(double log_mean, double log_sigma) {
  ConductanceLaw law;
  law.family = Family::Lognormal;
  law.log_mean = log_mean;
  law.log_sigma = log_sigma;
  return law;
}

double ConductanceLaw::sample(CounterRng& rng) const {
  switch (family) {
    case Family::Constant:
      return value;
    case Family::Pareto:
      return rng.pareto(alpha);
    case Family::Lognormal:
      return std::exp(log_mean + log_sigma * rng.normal());
  }
  return value;
}

std::pair<double, double> ConductanceLaw::estimate_mean_inverse(int draws,
                                                                CounterRng& rng) const {
  if (family == Family::Constant) return {1.0 / value, 0.0};
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < draws; ++i) {
    double inv = 1.0 / sample(rng);
    sum += inv;
    sum2 += inv * inv;
  }
  double mean = sum / draws;
  double var = std::max(0.0, sum2 / draws - mean * mean);
  return {mean, std::sqrt(var / draws)};
}

ResistanceNetwork sample_conductances(const ResistanceNetwork& net,
                                      const ConductanceLaw& law, CounterRng& rng) {
  std::vector<double> c(net.edges().size());
  for (double& w : c) w = law.sample(rng);
  return net.with_conductances(c);
}

ResistanceNetwork sample_conductances_per_cell(const FractalGraph& graph,
                                               const ConductanceLaw& law, CounterRng& rng,
                                               bool exchangeable_within_cell) {
  const ResistanceNetwork& net = graph.network;
  if (!graph.scheme.finitely_ramified) {
    // Shared (merged) edges would receive two draws; the per-cell joint law
    // is only defined on finitely ramified schemes.
    throw std::invalid_argument("per-cell sampling requires a finitely ramified scheme");
  }
  std::vector<double> c(net.edges().size(), 0.0);
  std::vector<double> cell_draw;
  for (const FractalCell& cell : graph.cells) {
    cell_draw.resize(cell.edge_ids.size());
    for (double& w : cell_draw) w = law.sample(rng);
    if (exchangeable_within_cell) {
      // Fisher-Yates with the replica stream keeps this reproducible.
      for (int k = static_cast<int>(cell_draw.size()) - 1; k > 0; --k) {
        int pick = static_cast<int>(rng.uniform() * (k + 1));
        std::swap(cell_draw[k], cell_draw[pick]);
      }
    }
    for (size_t k = 0; k < cell.edge_ids.size(); ++k) c[cell.edge_ids[k]] = cell_draw[k];
  }
  return net.with_conductances(c);
}

VertexMeasure trap_landscape(const ResistanceNetwork& net, double alpha, CounterRng& rng) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    // Finite-mean landscapes rescale toward the base measure instead of a
    // FIN limit; keep the heavy-tail regime explicit.
    throw std::invalid_argument("trap_landscape: alpha must lie in (0,1)");
  }
  VertexMeasure xi(net.vertex_count(), 0.0);
  for (double& w : xi.weights) w = rng.pareto(alpha);
  return xi;
}

VertexMeasure degree_measure(const ResistanceNetwork& net) {
  VertexMeasure nu(net.vertex_count(), 0.0);
  for (int v = 0; v < net.vertex_count(); ++v) nu.weights[v] = net.vertex_conductance(v);
  return nu;
}

GFFSampler::GFFSampler(const ResistanceNetwork& net) : root_(net.root()) {
  green_ = green_killed(net, root_);
  const int n = net.vertex_count();
  green_diag_.resize(n);
  for (int v = 0; v < n; ++v) green_diag_[v] = green_(v, v);

  // Reduced (root-free) Green block is positive definite; jitter covers
  // roundoff on nearly-degenerate networks and is surfaced via jitter_used().
  Eigen::MatrixXd reduced(n - 1, n - 1);
  std::vector<int> keep;
  keep.reserve(n - 1);
  for (int v = 0; v < n; ++v) {
    if (v != root_) keep.push_back(v);
  }
  for (int i = 0; i < n - 1; ++i) {
    for (int j = 0; j < n - 1; ++j) reduced(i, j) = green_(keep[i], keep[j]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(reduced);
  if (llt.info() != Eigen::Success) {
    jitter_ = 1e-12 * reduced.trace() / (n - 1);
    llt.compute(reduced + jitter_ * Eigen::MatrixXd::Identity(n - 1, n - 1));
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("gff: Green matrix factorization failed");
    }
  }
  factor_ = Eigen::MatrixXd::Zero(n, n - 1);
  Eigen::MatrixXd l = llt.matrixL();
  for (int i = 0; i < n - 1; ++i) factor_.row(keep[i]) = l.row(i);
}

GFFSample GFFSampler::sample(CounterRng& rng) const {
  const int m = static_cast<int>(factor_.cols());
  Eigen::VectorXd z(m);
  for (int i = 0; i < m; ++i) z[i] = rng.normal();
  Eigen::VectorXd g = factor_ * z;
  GFFSample s;
  s.gamma.assign(g.data(), g.data() + g.size());
  s.green_diag = green_diag_;
  s.root = root_;
  s.gamma[root_] = 0.0;
  return s;
}

GFFSample sample_gff(const ResistanceNetwork& net, CounterRng& rng) {
  return GFFSampler(net).sample(rng);
}

VertexMeasure liouville_measure(const GFFSample& gff, double kappa,
                                const VertexMeasure& base) {
  if (kappa < 0.0) throw std::invalid_argument("liouville: kappa must be >= 0");
  if (base.size() != static_cast<int>(gff.gamma.size())) {
    throw std::invalid_argument("liouville: base measure size mismatch");
  }
  VertexMeasure nu(base.size(), 0.0);
  for (int v = 0; v < base.size(); ++v) {
    nu.weights[v] =
        std::exp(kappa * gff.gamma[v] - 0.5 * kappa * kappa * gff.green_diag[v]) *
        base[v];
  }
  return nu;
}

FINMeasure fin_measure(const VertexMeasure& base, double alpha, double v_min,
                       CounterRng& rng) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("fin: alpha in (0,1)");
  if (!(v_min > 0.0)) throw std::invalid_argument("fin: v_min must be positive");
  FINMeasure fin;
  fin.v_min = v_min;
  fin.atoms = VertexMeasure(base.size(), 0.0);
  double rate = std::pow(v_min, -alpha);
  for (int v = 0; v < base.size(); ++v) {
    if (base[v] <= 0.0) continue;
    std::uint64_t count = rng.poisson(base[v] * rate);
    fin.atom_count += count;
    double sum = 0.0;
    if (alpha == 0.5) {
      for (std::uint64_t k = 0; k < count; ++k) {
        double u = rng.uniform_pos();
        sum += v_min / (u * u);
      }
    } else {
      for (std::uint64_t k = 0; k < count; ++k) {
        sum += v_min * std::pow(rng.uniform_pos(), -1.0 / alpha);
      }
    }
    fin.atoms.weights[v] = sum;
  }
  fin.truncation_bias =
      base.total() * alpha * std::pow(v_min, 1.0 - alpha) / (1.0 - alpha);
  return fin;
}

double fin_laplace_exact(double lambda, double alpha, double mass) {
  return std::exp(-std::pow(lambda, alpha) * std::tgamma(1.0 - alpha) * mass);
}

double hill_estimator(std::span<const double> samples, int top_k) {
  if (top_k < 2 || top_k > static_cast<int>(samples.size())) {
    throw std::invalid_argument("hill: top_k out of range");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double threshold = sorted[top_k - 1];
  double acc = 0.0;
  for (int i = 0; i < top_k - 1; ++i) acc += std::log(sorted[i] / threshold);
  return (top_k - 1) / acc;
}

}  // namespace resform
