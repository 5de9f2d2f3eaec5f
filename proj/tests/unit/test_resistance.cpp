#include <cmath>

#include "doctest.h"
#include "resform/fractal.hpp"
#include "resform/resistance.hpp"
#include "support/helpers.hpp"

using namespace resform;

TEST_CASE("effective resistance: series, triangle, gasket ratio") {
  CHECK(effective_resistance(build_path(1, 1.0), 0, 1) == doctest::Approx(1.0));
  CHECK(effective_resistance(build_path(3, 1.0), 0, 3) == doctest::Approx(3.0));
  CHECK(effective_resistance(build_path(10, 2.0), 0, 10) == doctest::Approx(5.0));

  ResistanceNetwork triangle(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}}, {1, 1, 1}, 0);
  CHECK(effective_resistance(triangle, 0, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(effective_resistance(triangle, 0, 0) == 0.0);

  FractalGraph g0 = build_fractal_graph(gasket_scheme(), 0);
  FractalGraph g1 = build_fractal_graph(gasket_scheme(), 1);
  auto corners = g1.cells_at(0)[0].boundary;
  double r0 = effective_resistance(g0.network, 0, 1);
  double r1 = effective_resistance(g1.network, corners[0], corners[1]);
  CHECK(std::abs(r1 - 10.0 / 9.0) < 1e-9);
  CHECK(std::abs(r1 / r0 - 5.0 / 3.0) < 1e-9);
}

TEST_CASE("resistance matrix: paths, symmetry and tree oracle") {
  Eigen::MatrixXd r = resistance_matrix(build_path(2, 1.0));
  CHECK(r(0, 2) == doctest::Approx(2.0));
  CHECK(r(0, 1) == doctest::Approx(1.0));
  CHECK(r(1, 2) == doctest::Approx(1.0));

  ResistanceNetwork triangle(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}}, {1, 1, 1}, 0);
  Eigen::MatrixXd rt = resistance_matrix(triangle);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(rt(i, j) == doctest::Approx(i == j ? 0.0 : 2.0 / 3.0));
    }
  }

  // Unit trees: effective resistance equals shortest-path distance.
  ResistanceNetwork tree = testsupport::random_tree(10, 31);
  Eigen::MatrixXd rr = resistance_matrix(tree);
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      CHECK(rr(i, j) == doctest::Approx(testsupport::bfs_distance(tree, i, j)).epsilon(1e-9));
    }
  }
}

TEST_CASE("resistance is a metric") {
  for (std::uint64_t seed : {5u, 6u}) {
    ResistanceNetwork net = testsupport::random_network(20, 15, seed);
    Eigen::MatrixXd r = resistance_matrix(net);
    for (int x = 0; x < 20; ++x) {
      for (int y = 0; y < 20; ++y) {
        CHECK(r(x, y) == doctest::Approx(r(y, x)).epsilon(1e-10));
        if (x != y) CHECK(r(x, y) > 0.0);
        for (int z = 0; z < 20; ++z) {
          CHECK(r(x, z) <= r(x, y) + r(y, z) + 1e-9);
        }
      }
    }
  }
}

TEST_CASE("schur trace: identity, series, gasket corners") {
  ResistanceNetwork p2 = build_path(2, 1.0);
  SchurResult all = schur_trace(p2, {0, 1, 2}, VertexMeasure(3, 1.0));
  CHECK(all.network.edges().size() == 2);
  CHECK(all.network.edges()[0].conductance == doctest::Approx(1.0));

  SchurResult ends = schur_trace(p2, {0, 2}, VertexMeasure(2, 1.0));
  REQUIRE(ends.network.edges().size() == 1);
  CHECK(ends.network.edges()[0].conductance == doctest::Approx(0.5));

  FractalGraph g1 = build_fractal_graph(gasket_scheme(), 1);
  auto corners = g1.cells_at(0)[0].boundary;
  SchurResult traced = schur_trace(g1.network, corners, VertexMeasure(3, 1.0));
  REQUIRE(traced.network.edges().size() == 3);
  for (const Edge& e : traced.network.edges()) {
    CHECK(std::abs(e.conductance - 0.6) < 1e-12);
  }

  CHECK_THROWS_AS(schur_trace(p2, {}, VertexMeasure(0, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(schur_trace(p2, {0, 2}, VertexMeasure(std::vector<double>{1.0, 0.0})),
                  std::invalid_argument);
}

TEST_CASE("schur trace preserves kept resistances") {
  for (int n : {20, 60, 120}) {
    ResistanceNetwork net = testsupport::random_network(n, n / 2, 1000 + n);
    Eigen::MatrixXd full = resistance_matrix(net);
    std::vector<int> keep;
    for (int v = 0; v < n; v += 3) keep.push_back(v);
    SchurResult traced = schur_trace(net, keep, VertexMeasure(keep.size(), 1.0));
    Eigen::MatrixXd reduced = resistance_matrix(traced.network);
    for (size_t i = 0; i < keep.size(); ++i) {
      for (size_t j = 0; j < keep.size(); ++j) {
        double want = full(keep[i], keep[j]);
        double got = reduced(i, j);
        CHECK(std::abs(got - want) <= 1e-9 * std::max(1.0, std::abs(want)));
      }
    }
    CHECK(traced.worst_negative > -1e-10);
  }
}

TEST_CASE("killed Green function identities") {
  ResistanceNetwork edge = build_path(1, 1.0);
  Eigen::MatrixXd g = green_killed(edge, 0);
  CHECK(g(1, 1) == doctest::Approx(1.0));
  CHECK(g(0, 0) == 0.0);

  ResistanceNetwork net = testsupport::random_network(8, 6, 77);
  Eigen::MatrixXd gr = green_killed(net, net.root());
  Eigen::MatrixXd r = resistance_matrix(net);
  // g(x,x) = R(root, x); 2 g(x,y) = R(root,x) + R(root,y) - R(x,y)
  for (int x = 0; x < 8; ++x) {
    CHECK(gr(x, x) == doctest::Approx(r(net.root(), x)).epsilon(1e-10));
    for (int y = 0; y < 8; ++y) {
      double want = r(net.root(), x) + r(net.root(), y) - r(x, y);
      CHECK(2.0 * gr(x, y) == doctest::Approx(want).epsilon(1e-9));
    }
  }

  // Mean hitting time through the occupation density of the killed walk.
  auto [e05, e50] = exact_commute_time(net, 0, 5);
  Eigen::MatrixXd g5 = green_killed(net, 5);
  double expect = 0.0;
  for (int z = 0; z < 8; ++z) expect += g5(0, z) * net.measure()[z];
  CHECK(e05 == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("potential density: two-state values and resolvent identity") {
  ResistanceNetwork edge = build_path(1, 1.0);
  Eigen::MatrixXd u = potential_density(edge);
  CHECK(u(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(u(0, 1) == doctest::Approx(1.0 / 3.0));
  // E_x exp(-tau_y) = u(x,y)/u(y,y) = 1/2, the Exp(1) hitting transform
  CHECK(u(0, 1) / u(1, 1) == doctest::Approx(0.5));

  ResistanceNetwork net = testsupport::random_network(12, 8, 4242);
  Eigen::MatrixXd un = potential_density(net);
  CHECK((un - un.transpose()).cwiseAbs().maxCoeff() < 1e-12);

  // (mu + L) u = I entrywise
  Eigen::MatrixXd a = Eigen::MatrixXd(weighted_laplacian(net));
  for (int v = 0; v < net.vertex_count(); ++v) a(v, v) += net.measure()[v];
  Eigen::MatrixXd prod = a * un;
  CHECK((prod - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-9);

  // fluctuation bound |u(x,y) - u(x,z)|^2 <= u(x,x) R(y,z)
  Eigen::MatrixXd r = resistance_matrix(net);
  for (int x = 0; x < 12; ++x) {
    for (int y = 0; y < 12; ++y) {
      for (int z = 0; z < 12; ++z) {
        double lhs = un(x, y) - un(x, z);
        CHECK(lhs * lhs <= un(x, x) * r(y, z) + 1e-12);
      }
    }
  }
}

TEST_CASE("heat kernel: endpoints and resolvent quadrature") {
  ResistanceNetwork net = testsupport::random_network(6, 4, 2024);
  HeatKernel hk(net);

  Eigen::MatrixXd p0 = hk.at(0.0);
  for (int x = 0; x < 6; ++x) {
    for (int y = 0; y < 6; ++y) {
      double want = x == y ? 1.0 / net.measure()[x] : 0.0;
      CHECK(p0(x, y) == doctest::Approx(want).epsilon(1e-10));
    }
  }

  // stochasticity: sum_y p_t(x,y) mu(y) = 1
  Eigen::MatrixXd p1 = hk.at(0.7);
  for (int x = 0; x < 6; ++x) {
    double total = 0.0;
    for (int y = 0; y < 6; ++y) total += p1(x, y) * net.measure()[y];
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK((p1 - p1.transpose()).cwiseAbs().maxCoeff() < 1e-10);

  // equilibrium
  Eigen::MatrixXd pinf = hk.at(2000.0);
  for (int x = 0; x < 6; ++x) {
    for (int y = 0; y < 6; ++y) {
      CHECK(pinf(x, y) == doctest::Approx(1.0 / net.measure_total()).epsilon(1e-8));
    }
  }

  // Simpson quadrature of int_0^inf e^{-t} p_t dt against the potential
  // density; tail beyond T handled by the equilibrium value.
  Eigen::MatrixXd u = potential_density(net);
  const double t_max = 40.0;
  const int steps = 4000;  // even
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(6, 6);
  for (int k = 0; k <= steps; ++k) {
    double t = t_max * k / steps;
    double w = (k == 0 || k == steps) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    acc += w * std::exp(-t) * hk.at(t);
  }
  acc *= t_max / steps / 3.0;
  acc += std::exp(-t_max) / net.measure_total() * Eigen::MatrixXd::Ones(6, 6);
  CHECK((acc - u).cwiseAbs().maxCoeff() < 1e-6);

  CHECK_THROWS_AS(hk.at(-1.0), std::invalid_argument);
}

TEST_CASE("commute time identity") {
  ResistanceNetwork edge = build_path(1, 1.0);
  auto [exy, eyx] = exact_commute_time(edge, 0, 1);
  CHECK(exy == doctest::Approx(1.0));
  CHECK(exy + eyx == doctest::Approx(2.0));

  ResistanceNetwork triangle(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}}, {1, 1, 1}, 0);
  auto [e01, e10] = exact_commute_time(triangle, 0, 1);
  CHECK(e01 + e10 == doctest::Approx(2.0));

  FractalGraph g2 = build_fractal_graph(gasket_scheme(), 2);
  auto corners = g2.cells_at(0)[0].boundary;
  auto [eab, eba] = exact_commute_time(g2.network, corners[0], corners[1]);
  double want = effective_resistance(g2.network, corners[0], corners[1]) *
                g2.network.measure_total();
  CHECK(std::abs(eab + eba - want) < 1e-9);

  auto same = exact_commute_time(g2.network, 3, 3);
  CHECK(same.first == 0.0);
  CHECK(same.second == 0.0);

  ResistanceNetwork net = testsupport::random_network(30, 20, 808);
  Eigen::MatrixXd r = resistance_matrix(net);
  for (int x = 0; x < 30; x += 7) {
    for (int y = 0; y < 30; y += 5) {
      if (x == y) continue;
      auto [a, b] = exact_commute_time(net, x, y);
      CHECK(std::abs(a + b - r(x, y) * net.measure_total()) < 1e-9);
    }
  }
}
