#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "resform/network.hpp"
#include "resform/simulate.hpp"

namespace resform {

// Finite rooted measured point set in the plane (the common embedding all
// comparisons happen in).
struct EmbeddedSpace {
  std::vector<std::array<double, 2>> points;
  std::vector<double> mass;
  int root = 0;

  int size() const { return static_cast<int>(points.size()); }
  double total_mass() const;
};

// Planar embedding of a built network with rescaled masses: mass(x) =
// mass_scale * mu(x). metric_scale is carried by the caller's coordinates.
EmbeddedSpace embed_network(const ResistanceNetwork& net, double mass_scale = 1.0);

double euclidean(const std::array<double, 2>& a, const std::array<double, 2>& b);

// max of the two directed sup-min distances between the supports.
double hausdorff_distance(const EmbeddedSpace& a, const EmbeddedSpace& b);

// Exact Prohorov distance between the two mass distributions:
// inf{eps : mu(A) <= nu(A^eps) + eps for all A, and symmetrically}. Feasibility
// at a candidate eps is a bipartite max-flow check; candidates are the
// pairwise distances and the mass-deficiency values they induce.
double prohorov_distance(const EmbeddedSpace& a, const EmbeddedSpace& b);

// d_H + d_P + root distance within the common embedding; an upper bound for
// the optimal-embedding distance.
double common_embedding_gap(const EmbeddedSpace& a, const EmbeddedSpace& b);

// Gauge of Gromov-Hausdorff-vague closeness restricted to this embedding:
// integral of e^{-r} (1 and the gap of the closed-ball restrictions) over the
// given grid. The integrand is piecewise constant between ball-entry radii;
// those radii are inserted before midpoint quadrature, so the integral over
// the grid's span is exact.
double gh_vague_gap(const EmbeddedSpace& a, const EmbeddedSpace& b,
                    std::span<const double> r_grid);

struct NetProjection {
  std::vector<int> assignment;      // per point: index of the first covering center
  std::vector<double> pushforward;  // mass per center
  double max_displacement = 0.0;
};

// First-cover peeling: each point goes to the first center (in the given
// order) whose closed eps-ball contains it. Throws with the uncovered point
// list when the centers fail to cover.
NetProjection net_projection(const EmbeddedSpace& space,
                             const std::vector<std::array<double, 2>>& centers,
                             double eps);

struct VolumeProfile {
  std::vector<int> centers;
  std::vector<double> radii;
  std::vector<std::vector<double>> table;  // [center][radius] open-ball mass
  double r0 = 0.0;    // min positive pairwise distance
  double r_inf = 0.0; // diameter
  std::vector<double> fitted;  // mean profile v(r) over centers
  double doubling_estimate = 0.0;  // max_r v(2r)/v(r)
  bool uvd_plausible = false;      // cross-center ratios bounded on [r0, r_inf]
};

VolumeProfile volume_profile(const EmbeddedSpace& space, const std::vector<int>& centers,
                             std::vector<double> radii, double uvd_ratio_bound = 16.0);

// Two-sample Kolmogorov-Smirnov statistic (sup distance of empirical CDFs).
double ks_distance(std::span<const double> a, std::span<const double> b);
// Large-sample critical value c(alpha) sqrt((n+m)/(nm)) at the 5% level.
double ks_critical_value_5pct(std::size_t n, std::size_t m);

// sup_{R(y,z) <= delta} sup_{t <= T} |L_t(y) - L_t(z)| per delta. The inner
// sup is exact: the difference is piecewise linear in t between holding
// boundaries.
std::vector<double> local_time_modulus(const LocalTimeField& ltf,
                                       const Eigen::MatrixXd& resistance,
                                       std::span<const double> delta_grid, double t_max);

}  // namespace resform
