#include <cmath>

#include "doctest.h"
#include "resform/fractal.hpp"
#include "resform/metrics.hpp"
#include "resform/resistance.hpp"
#include "support/helpers.hpp"

using namespace resform;

namespace {

EmbeddedSpace random_space(int n, std::uint64_t seed, int root = 0) {
  CounterRng rng(seed, 0);
  EmbeddedSpace s;
  s.root = root;
  for (int i = 0; i < n; ++i) {
    s.points.push_back({2.0 * rng.uniform(), 2.0 * rng.uniform()});
    s.mass.push_back(0.1 + rng.uniform());
  }
  return s;
}

}  // namespace

TEST_CASE("hausdorff distance") {
  EmbeddedSpace a = random_space(7, 1);
  CHECK(hausdorff_distance(a, a) == 0.0);

  EmbeddedSpace x{{{0.0, 0.0}}, {1.0}, 0};
  EmbeddedSpace y{{{1.0, 0.0}}, {1.0}, 0};
  CHECK(hausdorff_distance(x, y) == doctest::Approx(1.0));

  // gasket V1 vs V2 in the plane: every V2 point is within half the level-2
  // cell side (0.25) of V1
  FractalGraph g1 = build_fractal_graph(gasket_scheme(), 1);
  FractalGraph g2 = build_fractal_graph(gasket_scheme(), 2);
  double d = hausdorff_distance(embed_network(g1.network), embed_network(g2.network));
  CHECK(d <= 0.25 + 1e-12);

  EmbeddedSpace empty;
  CHECK_THROWS_AS(hausdorff_distance(empty, a), std::invalid_argument);
}

TEST_CASE("prohorov: identities and two-point case") {
  EmbeddedSpace a = random_space(6, 2);
  CHECK(prohorov_distance(a, a) == doctest::Approx(0.0));

  // unit masses at distance d: min(d, 1)
  for (double d : {0.3, 0.9, 2.5}) {
    EmbeddedSpace x{{{0.0, 0.0}}, {1.0}, 0};
    EmbeddedSpace y{{{d, 0.0}}, {1.0}, 0};
    CHECK(prohorov_distance(x, y) == doctest::Approx(std::min(d, 1.0)));
  }
}

TEST_CASE("prohorov equals brute force on small supports") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    CounterRng size_rng(seed, 9);
    int n = 2 + static_cast<int>(size_rng.uniform() * 6);
    int m = 2 + static_cast<int>(size_rng.uniform() * 6);
    EmbeddedSpace a = random_space(n, 10 * seed);
    EmbeddedSpace b = random_space(m, 10 * seed + 5);
    double fast = prohorov_distance(a, b);
    double slow = testsupport::prohorov_bruteforce(a, b);
    CHECK(std::abs(fast - slow) < 1e-12);
  }
}

TEST_CASE("prohorov and hausdorff: symmetry and triangle inequality") {
  for (std::uint64_t seed = 40; seed < 46; ++seed) {
    EmbeddedSpace a = random_space(5, seed);
    EmbeddedSpace b = random_space(6, seed + 100);
    EmbeddedSpace c = random_space(4, seed + 200);
    double hab = hausdorff_distance(a, b), hba = hausdorff_distance(b, a);
    double pab = prohorov_distance(a, b), pba = prohorov_distance(b, a);
    CHECK(hab == doctest::Approx(hba));
    CHECK(pab == doctest::Approx(pba).epsilon(1e-10));
    CHECK(hausdorff_distance(a, c) <= hab + hausdorff_distance(b, c) + 1e-12);
    CHECK(prohorov_distance(a, c) <= pab + prohorov_distance(b, c) + 1e-10);
  }
}

TEST_CASE("common embedding gap") {
  EmbeddedSpace a = random_space(6, 50);
  CHECK(common_embedding_gap(a, a) == doctest::Approx(0.0));

  // pure root mismatch on an otherwise identical space
  EmbeddedSpace b = a;
  b.root = 1;
  double gap = common_embedding_gap(a, b);
  CHECK(gap == doctest::Approx(euclidean(a.points[a.root], b.points[b.root])));

  // rescaled gasket levels shrink the gap
  double prev = 1e18;
  for (int level = 1; level <= 4; ++level) {
    FractalGraph ga = build_fractal_graph(gasket_scheme(), level);
    FractalGraph gb = build_fractal_graph(gasket_scheme(), level + 1);
    double bn_a = std::pow(gasket_scheme().mass_scale, level);
    double bn_b = std::pow(gasket_scheme().mass_scale, level + 1);
    double g = common_embedding_gap(embed_network(ga.network, bn_a),
                                    embed_network(gb.network, bn_b));
    CHECK(g < prev);
    prev = g;
  }
}

TEST_CASE("gh vague gauge") {
  EmbeddedSpace a = random_space(6, 60);
  std::vector<double> grid{0.0, 0.5, 1.0, 2.0, 4.0};
  CHECK(gh_vague_gap(a, a, grid) == doctest::Approx(0.0));

  // beyond both diameters the integrand is the saturated constant gap
  EmbeddedSpace x{{{0.0, 0.0}, {0.05, 0.0}}, {1.0, 1.0}, 0};
  EmbeddedSpace y{{{0.0, 0.01}, {0.05, 0.01}}, {1.0, 1.0}, 0};
  double full_gap = std::min(1.0, common_embedding_gap(x, y));
  std::vector<double> wide{0.1, 1.0, 3.0};
  double want = (std::exp(-0.1) - std::exp(-3.0)) * full_gap;
  CHECK(gh_vague_gap(x, y, wide) == doctest::Approx(want).epsilon(1e-9));

  // decreasing along the gasket level sequence
  double prev = 1e18;
  std::vector<double> ggrid{0.0, 0.25, 0.5, 1.0, 1.5, 2.0};
  for (int level = 1; level <= 3; ++level) {
    FractalGraph ga = build_fractal_graph(gasket_scheme(), level);
    FractalGraph gb = build_fractal_graph(gasket_scheme(), level + 1);
    double g = gh_vague_gap(
        embed_network(ga.network, std::pow(1.0 / 3.0, level)),
        embed_network(gb.network, std::pow(1.0 / 3.0, level + 1)), ggrid);
    CHECK(g < prev);
    prev = g;
  }

  // refining the grid cannot change the jump-refined quadrature
  EmbeddedSpace c = random_space(5, 61);
  EmbeddedSpace d = random_space(5, 62);
  std::vector<double> coarse{0.0, 1.0, 4.0};
  std::vector<double> fine{0.0, 0.25, 0.5, 1.0, 2.0, 3.0, 4.0};
  CHECK(gh_vague_gap(c, d, coarse) == doctest::Approx(gh_vague_gap(c, d, fine)).epsilon(1e-12));
}

TEST_CASE("net projection: identity, mass preservation, displacement") {
  FractalGraph g3 = build_fractal_graph(gasket_scheme(), 3);
  EmbeddedSpace s = embed_network(g3.network);

  // centers = all points with tiny radius: identity map
  double r0 = 1e18;
  for (int i = 0; i < s.size(); ++i) {
    for (int j = i + 1; j < s.size(); ++j) {
      r0 = std::min(r0, euclidean(s.points[i], s.points[j]));
    }
  }
  NetProjection id = net_projection(s, s.points, 0.4 * r0);
  for (int i = 0; i < s.size(); ++i) CHECK(id.assignment[i] == i);
  CHECK(id.max_displacement == 0.0);

  // level-1 corner images as centers with a covering epsilon
  FractalGraph g1 = build_fractal_graph(gasket_scheme(), 1);
  std::vector<std::array<double, 2>> centers = g1.network.coords();
  double eps = 0.3;
  NetProjection proj = net_projection(s, centers, eps);
  double total = 0.0;
  for (double m : proj.pushforward) total += m;
  CHECK(total == doctest::Approx(s.total_mass()).epsilon(1e-12));
  CHECK(proj.max_displacement <= 2.0 * eps + 1e-12);

  // coverage failure reported with the uncovered points
  CHECK_THROWS_WITH_AS(net_projection(s, {{0.0, 0.0}}, 0.05),
                       doctest::Contains("uncovered"), std::invalid_argument);
}

TEST_CASE("volume profile") {
  FractalGraph g2 = build_fractal_graph(gasket_scheme(), 2);
  EmbeddedSpace s = embed_network(g2.network);
  std::vector<int> centers{0, 3, 7};
  VolumeProfile vp = volume_profile(s, centers, {0.01, 0.3, 0.6, 2.0});

  // r below the minimum gap sees only the center itself
  for (size_t c = 0; c < centers.size(); ++c) {
    CHECK(vp.table[c][0] == doctest::Approx(s.mass[centers[c]]));
    // r beyond the diameter captures everything
    CHECK(vp.table[c][3] == doctest::Approx(s.total_mass()));
  }
  CHECK(vp.r0 > 0.0);
  CHECK(vp.r_inf <= 1.0 + 1e-12);
  CHECK(vp.doubling_estimate >= 1.0);

  // profile is nondecreasing in r per center
  for (size_t c = 0; c < centers.size(); ++c) {
    for (size_t k = 0; k + 1 < vp.radii.size(); ++k) {
      CHECK(vp.table[c][k] <= vp.table[c][k + 1] + 1e-15);
    }
  }

  // doubling estimates stable (within a factor 2) across rescaled levels
  double prev = -1.0;
  for (int level = 2; level <= 4; ++level) {
    FractalGraph g = build_fractal_graph(gasket_scheme(), level);
    double bn = std::pow(1.0 / 3.0, level);
    EmbeddedSpace sp = embed_network(g.network, bn);
    std::vector<int> cs{0, g.network.vertex_count() / 2, g.network.vertex_count() - 1};
    VolumeProfile p = volume_profile(sp, cs, {0.1, 0.2, 0.4});
    if (prev > 0.0) {
      CHECK(p.doubling_estimate < 2.0 * prev);
      CHECK(p.doubling_estimate > 0.5 * prev);
    }
    prev = p.doubling_estimate;
  }

  CHECK_THROWS_AS(volume_profile(s, centers, {0.5, 0.1}), std::invalid_argument);
}

TEST_CASE("ks distance") {
  std::vector<double> a{1.0, 2.0, 3.0};
  CHECK(ks_distance(a, a) == 0.0);
  std::vector<double> zero{0.0}, one{1.0};
  CHECK(ks_distance(zero, one) == doctest::Approx(1.0));
  CHECK_THROWS_AS(ks_distance({}, a), std::invalid_argument);

  // calibration: two Exp(1) samples of size 1e4 stay below the 5% critical
  // value in >= 94 of 100 repetitions
  int below = 0;
  const int n = 10000;
  for (int rep = 0; rep < 100; ++rep) {
    CounterRng ra(500 + rep, 0), rb(600 + rep, 0);
    std::vector<double> xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
      xs[i] = ra.exponential(1.0);
      ys[i] = rb.exponential(1.0);
    }
    if (ks_distance(xs, ys) < ks_critical_value_5pct(n, n)) ++below;
  }
  CHECK(below >= 94);
}

TEST_CASE("local time modulus") {
  FractalGraph g = build_fractal_graph(gasket_scheme(), 1);
  CounterRng rng(70, 0);
  Trajectory traj = simulate_vsrw(g.network, 0, 60.0, rng);
  LocalTimeField ltf(traj, g.network);
  Eigen::MatrixXd r = resistance_matrix(g.network);

  double diam = r.maxCoeff();
  std::vector<double> deltas{0.0, 0.3 * diam, 0.6 * diam, diam};
  std::vector<double> mod = local_time_modulus(ltf, r, deltas, 60.0);

  CHECK(mod[0] == 0.0);
  for (size_t k = 0; k + 1 < mod.size(); ++k) CHECK(mod[k] <= mod[k + 1] + 1e-15);

  // at delta >= diameter the modulus dominates the horizon max-min spread
  double lo = 1e18, hi = -1e18;
  for (int v = 0; v < g.network.vertex_count(); ++v) {
    lo = std::min(lo, ltf.at(v, 60.0));
    hi = std::max(hi, ltf.at(v, 60.0));
  }
  CHECK(mod.back() >= hi - lo - 1e-12);
}

TEST_CASE("empirical local-time modulus shrinks with delta across levels") {
  // matched rescaling: resistance scaled by a_n, local times by a_n as well
  // (the occupation identity fixes L ~ t / mu once time is run at the walk
  // scale t / (a_n b_n))
  for (int level : {2, 3}) {
    FractalGraph g = build_fractal_graph(gasket_scheme(), level);
    double an = std::pow(3.0 / 5.0, level);
    double bn = std::pow(1.0 / 3.0, level);
    Eigen::MatrixXd r = resistance_matrix(g.network) * an;
    double horizon = 2.0 / (an * bn);

    std::vector<double> deltas{0.05, 0.15, 0.4, 1.0};
    std::vector<double> q95(deltas.size(), 0.0);
    const int reps = 40;
    std::vector<std::vector<double>> samples(deltas.size());
    for (int rep = 0; rep < reps; ++rep) {
      CounterRng rng(80 + level, rep);
      Trajectory traj = simulate_vsrw(g.network, 0, horizon, rng);
      LocalTimeField ltf(traj, g.network);
      std::vector<double> mod = local_time_modulus(ltf, r, deltas, horizon);
      for (size_t k = 0; k < deltas.size(); ++k) samples[k].push_back(an * mod[k]);
    }
    for (size_t k = 0; k + 1 < deltas.size(); ++k) {
      std::sort(samples[k].begin(), samples[k].end());
      std::sort(samples[k + 1].begin(), samples[k + 1].end());
      CHECK(samples[k][static_cast<size_t>(0.95 * (reps - 1))] <=
            samples[k + 1][static_cast<size_t>(0.95 * (reps - 1))] + 1e-12);
    }
  }
}
