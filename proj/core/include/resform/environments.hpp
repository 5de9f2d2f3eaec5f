#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "resform/fractal.hpp"
#include "resform/network.hpp"
#include "resform/rng.hpp"

namespace resform {

// Edge/vertex weight laws. Pareto has P(w > u) = u^{-alpha} on [1, inf),
// sampled by inverse CDF so draws are reproducible bit-for-bit from the
// counter stream.
struct ConductanceLaw {
  enum class Family { Constant, Pareto, Lognormal };
  Family family = Family::Constant;
  double alpha = 0.5;      // pareto tail index
  double value = 1.0;      // constant
  double log_mean = 0.0;   // lognormal parameters
  double log_sigma = 1.0;

  static ConductanceLaw constant(double v);
  static ConductanceLaw pareto(double alpha);
  static ConductanceLaw lognormal(double log_mean, double log_sigma);

  double sample(CounterRng& rng) const;
  // E[w^{-1}] and its standard error, estimated by Monte Carlo; the tree
  // homogenization factor. Never hard-coded downstream.
  std::pair<double, double> estimate_mean_inverse(int draws, CounterRng& rng) const;
};

// Independent draw per edge; returns the reweighted network.
ResistanceNetwork sample_conductances(const ResistanceNetwork& net,
                                      const ConductanceLaw& law, CounterRng& rng);

// Independent cell-template draw per n-cell (the default is i.i.d. entries
// per cell edge; exchangeable permutes the drawn vector within each cell).
ResistanceNetwork sample_conductances_per_cell(const FractalGraph& graph,
                                               const ConductanceLaw& law, CounterRng& rng,
                                               bool exchangeable_within_cell = false);

// I.i.d. pareto(alpha) trap landscape xi; alpha in (0,1).
VertexMeasure trap_landscape(const ResistanceNetwork& net, double alpha, CounterRng& rng);

// nu(x) = sum of conductances incident to x; total mass 2 * sum_e w_e.
VertexMeasure degree_measure(const ResistanceNetwork& net);

struct GFFSample {
  std::vector<double> gamma;   // pinned: gamma[root] == 0
  std::vector<double> green_diag;  // g(x,x) = Var gamma(x), for normalizations
  int root = 0;
};

// Gaussian free field pinned at the root: covariance is the killed Green
// function, so E(gamma(x)-gamma(y))^2 = R(x,y). Factorizes the Green matrix
// once; sampling is then a matrix-vector product per draw.
class GFFSampler {
 public:
  explicit GFFSampler(const ResistanceNetwork& net);

  GFFSample sample(CounterRng& rng) const;
  const Eigen::MatrixXd& green() const { return green_; }
  double jitter_used() const { return jitter_; }

 private:
  Eigen::MatrixXd green_;
  Eigen::MatrixXd factor_;  // gamma = factor * z
  std::vector<double> green_diag_;
  int root_ = 0;
  double jitter_ = 0.0;
};

GFFSample sample_gff(const ResistanceNetwork& net, CounterRng& rng);

// nu(x) = exp(kappa gamma(x) - kappa^2 g(x,x)/2) mu(x); mean-one lognormal
// density against mu.
VertexMeasure liouville_measure(const GFFSample& gff, double kappa,
                                const VertexMeasure& base);

struct FINMeasure {
  VertexMeasure atoms;      // per-vertex summed atom weights
  double v_min = 0.0;       // truncation threshold
  double truncation_bias = 0.0;  // mean mass discarded: mu(F) alpha v_min^{1-alpha}/(1-alpha)
  std::size_t atom_count = 0;
};

// Poisson random measure with intensity alpha v^{-1-alpha} dv mu(dx),
// truncated at weights >= v_min: per vertex the atom count is
// Poisson(mu(x) v_min^{-alpha}) with i.i.d. pareto-tail weights above v_min.
FINMeasure fin_measure(const VertexMeasure& base, double alpha, double v_min,
                       CounterRng& rng);

// Closed form of the FIN Laplace functional: E e^{-lambda nu(B)} =
// exp(-lambda^alpha Gamma(1-alpha) mu(B)).
double fin_laplace_exact(double lambda, double alpha, double mass);

// Hill tail-index estimator from the top k order statistics.
double hill_estimator(std::span<const double> samples, int top_k);

}  // namespace resform
