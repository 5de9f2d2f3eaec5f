#include <cmath>

#include "doctest.h"
#include "resform/fractal.hpp"
#include "resform/homogenize.hpp"
#include "support/helpers.hpp"

using namespace resform;

namespace {

QMatrix random_irreducible(int size, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  Eigen::MatrixXd off(size, size);
  off.setZero();
  for (int i = 0; i < size; ++i) {
    for (int j = i + 1; j < size; ++j) {
      off(i, j) = off(j, i) = 0.2 + 2.0 * rng.uniform();
    }
  }
  return QMatrix::from_conductances(off);
}

}  // namespace

TEST_CASE("QMatrix membership predicates") {
  QMatrix uniform = QMatrix::uniform(3, 1.0);
  CHECK(uniform.in_q());
  CHECK(uniform.in_qm());
  CHECK(uniform.in_int_qm());
  CHECK(uniform.irreducible());
  CHECK(uniform.trace_norm() == doctest::Approx(6.0));

  // with a zero off-diagonal: still QM and irreducible, no longer Int(QM)
  Eigen::MatrixXd off = Eigen::MatrixXd::Zero(3, 3);
  off(0, 1) = off(1, 0) = 1.0;
  off(1, 2) = off(2, 1) = 1.0;
  QMatrix chain = QMatrix::from_conductances(off);
  CHECK(chain.in_qm());
  CHECK(!chain.in_int_qm());
  CHECK(chain.irreducible());

  Eigen::MatrixXd disc = Eigen::MatrixXd::Zero(4, 4);
  disc(0, 1) = disc(1, 0) = 1.0;
  disc(2, 3) = disc(3, 2) = 1.0;
  QMatrix split = QMatrix::from_conductances(disc);
  CHECK(split.in_qm());
  CHECK(!split.irreducible());

  // negative conductance: in Q, outside QM
  Eigen::MatrixXd bad(2, 2);
  bad << 0.5, -0.5, -0.5, 0.5;
  QMatrix signedq(bad);
  CHECK(signedq.in_q());
  CHECK(!signedq.in_qm());

  for (std::uint64_t s = 1; s <= 20; ++s) {
    QMatrix q = random_irreducible(4, s);
    CHECK(q.in_q());
    CHECK(q.in_qm());
    CHECK(q.irreducible());
  }
}

TEST_CASE("trace_to_boundary: level 0 and the gasket contraction") {
  FractalScheme gasket = gasket_scheme();
  QMatrix q = random_irreducible(3, 5);
  std::vector<QMatrix> one{q};
  QMatrix back = trace_to_boundary(gasket, 0, one);
  CHECK((back - q).frobenius() < 1e-12);

  // constant unit-triangle assignment contracts by exactly 3/5
  QMatrix unit = QMatrix::uniform(3, 1.0);
  std::vector<QMatrix> cells(3, unit);
  QMatrix traced = trace_to_boundary(gasket, 1, cells);
  CHECK((traced - unit * (3.0 / 5.0)).frobenius() < 1e-12);

  // missing assignment rejected
  std::vector<QMatrix> short_list(2, unit);
  CHECK_THROWS_AS(trace_to_boundary(gasket, 1, short_list), std::invalid_argument);

  // disconnected assembly rejected: single-edge cells leave corner 2 isolated
  Eigen::MatrixXd off = Eigen::MatrixXd::Zero(3, 3);
  off(0, 1) = off(1, 0) = 1.0;
  std::vector<QMatrix> sparse(3, QMatrix::from_conductances(off));
  CHECK_THROWS_AS(trace_to_boundary(gasket, 1, sparse), std::invalid_argument);
}

TEST_CASE("trace monotonicity in the form order") {
  // Larger cell conductances give a larger traced form.
  FractalScheme gasket = gasket_scheme();
  CounterRng rng(6, 0);
  for (int rep = 0; rep < 10; ++rep) {
    QMatrix q = random_irreducible(3, 100 + rep);
    Eigen::MatrixXd bump = Eigen::MatrixXd::Zero(3, 3);
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        bump(i, j) = bump(j, i) = rng.uniform();
      }
    }
    QMatrix qp = q + QMatrix::from_conductances(bump);
    std::vector<QMatrix> ca(3, q), cb(3, qp);
    QMatrix ta = trace_to_boundary(gasket, 1, ca);
    QMatrix tb = trace_to_boundary(gasket, 1, cb);
    for (int probe = 0; probe < 100; ++probe) {
      Eigen::VectorXd xi(3);
      for (int i = 0; i < 3; ++i) xi[i] = rng.uniform() - 0.5;
      CHECK(ta.energy(xi) <= tb.energy(xi) + 1e-10);
    }
  }
}

TEST_CASE("renormalize: fixed point, superadditivity, concavity of the mean") {
  FractalScheme gasket = gasket_scheme();
  QMatrix unit = QMatrix::uniform(3, 1.0);
  QMatrix round_trip = renormalize(unit, gasket, 5.0 / 3.0);
  CHECK((round_trip - unit).frobenius() < 1e-10);

  CounterRng rng(7, 0);
  const double rho = 5.0 / 3.0;

  // Phi(a q1 + b q2) >= a Phi(q1) + b Phi(q2) on probe vectors
  for (int rep = 0; rep < 10; ++rep) {
    QMatrix q1 = random_irreducible(3, 200 + rep);
    QMatrix q2 = random_irreducible(3, 300 + rep);
    double a = rng.uniform(), b = rng.uniform();
    QMatrix mix = q1 * a + q2 * b;
    QMatrix lhs = renormalize(mix, gasket, rho);
    QMatrix rhs = renormalize(q1, gasket, rho) * a + renormalize(q2, gasket, rho) * b;
    for (int probe = 0; probe < 100; ++probe) {
      Eigen::VectorXd xi(3);
      for (int i = 0; i < 3; ++i) xi[i] = rng.uniform() - 0.5;
      CHECK(lhs.energy(xi) >= rhs.energy(xi) - 1e-10);
    }
  }

  // E Phi(theta) <= Phi(E theta) as forms, Monte Carlo over random cells
  const int samples = 300;
  Eigen::MatrixXd mean_phi = Eigen::MatrixXd::Zero(3, 3);
  Eigen::MatrixXd mean_q = Eigen::MatrixXd::Zero(3, 3);
  for (int s = 0; s < samples; ++s) {
    QMatrix q = random_irreducible(3, 5000 + s);
    mean_phi += renormalize(q, gasket, rho).matrix();
    mean_q += q.matrix();
  }
  QMatrix e_phi(mean_phi / samples);
  QMatrix phi_e = renormalize(QMatrix(mean_q / samples), gasket, rho);
  for (int probe = 0; probe < 200; ++probe) {
    Eigen::VectorXd xi(3);
    for (int i = 0; i < 3; ++i) xi[i] = rng.uniform() - 0.5;
    // allow Monte Carlo slack proportional to the probe energy
    CHECK(e_phi.energy(xi) <= phi_e.energy(xi) + 0.05 * phi_e.energy(xi) + 1e-9);
  }
}

TEST_CASE("fixed point: gasket from random irreducible starts") {
  FractalScheme gasket = gasket_scheme();
  for (std::uint64_t s = 1; s <= 6; ++s) {
    FixedPointResult fp = fixed_point(gasket, random_irreducible(3, 400 + s), 1e-12, 300);
    CHECK(std::abs(fp.rho - 5.0 / 3.0) < 1e-8);
    // symmetric fixed point: all off-diagonals equal after normalization
    double q01 = fp.q(0, 1), q02 = fp.q(0, 2), q12 = fp.q(1, 2);
    CHECK(std::abs(q01 - q02) < 1e-8);
    CHECK(std::abs(q01 - q12) < 1e-8);
  }
  CHECK_THROWS_AS(
      fixed_point(gasket, QMatrix(Eigen::MatrixXd::Zero(3, 3)), 1e-10, 50),
      std::invalid_argument);
}

TEST_CASE("fixed point: vicsek scaling factor matches the tree metric") {
  // Resistance on the Vicsek set scales by 3 per level (a_n = 3^{-n}).
  FractalScheme vicsek = vicsek_scheme();
  FixedPointResult fp = fixed_point(vicsek, QMatrix::uniform(4, 1.0));
  CHECK(std::abs(fp.rho - 3.0) < 1e-8);
  FixedPointResult fp2 = fixed_point(vicsek, random_irreducible(4, 77), 1e-12, 400);
  CHECK(std::abs(fp2.rho - 3.0) < 1e-6);
}

TEST_CASE("harmonic matrices: stochastic rows, boundary rows, gasket values") {
  FractalScheme gasket = gasket_scheme();
  FixedPointResult fp = fixed_point(gasket, QMatrix::uniform(3, 1.0));
  HarmonicMatrices hm = harmonic_matrices(gasket, fp.q);
  REQUIRE(hm.a.size() == 3);
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 3; ++i) {
      CHECK(hm.a[k].row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
      for (int j = 0; j < 3; ++j) CHECK(hm.a[k](i, j) >= -1e-14);
    }
    // boundary maps fix their own corner: row k of A_k is e_k
    for (int j = 0; j < 3; ++j) {
      CHECK(hm.a[k](k, j) == doctest::Approx(j == k ? 1.0 : 0.0).epsilon(1e-12));
    }
  }
  // midpoint hitting probabilities (2/5, 2/5, 1/5)
  // Psi_1(a_2) is the midpoint between corners 1 and 2; checked via A_1 row 2
  std::vector<double> row{hm.a[0](1, 0), hm.a[0](1, 1), hm.a[0](1, 2)};
  std::sort(row.begin(), row.end());
  CHECK(row[0] == doctest::Approx(0.2).epsilon(1e-10));
  CHECK(row[1] == doctest::Approx(0.4).epsilon(1e-10));
  CHECK(row[2] == doctest::Approx(0.4).epsilon(1e-10));

  // reducible input rejected
  Eigen::MatrixXd disc = Eigen::MatrixXd::Zero(3, 3);
  disc(0, 1) = disc(1, 0) = 1.0;
  CHECK_THROWS_AS(harmonic_matrices(gasket, QMatrix::from_conductances(disc)),
                  std::invalid_argument);
}

TEST_CASE("linearized map: fixes Q*, linear, contracts deviations") {
  FractalScheme gasket = gasket_scheme();
  FixedPointResult fp = fixed_point(gasket, QMatrix::uniform(3, 1.0));
  HarmonicMatrices hm = harmonic_matrices(gasket, fp.q);

  QMatrix hq = linearized_map(fp.q, hm, fp.rho);
  CHECK((hq - fp.q).frobenius() < 1e-10);

  CounterRng rng(8, 0);
  QMatrix q1 = random_irreducible(3, 600);
  QMatrix q2 = random_irreducible(3, 601);
  double a = 0.7, b = 1.3;
  QMatrix lin = linearized_map(q1 * a + q2 * b, hm, fp.rho);
  QMatrix split = linearized_map(q1, hm, fp.rho) * a + linearized_map(q2, hm, fp.rho) * b;
  CHECK((lin - split).frobenius() < 1e-12);

  // domination: H(Q) >= Phi(Q) as forms
  for (int rep = 0; rep < 10; ++rep) {
    QMatrix q = random_irreducible(3, 700 + rep);
    QMatrix h = linearized_map(q, hm, fp.rho);
    QMatrix phi = renormalize(q, gasket, fp.rho);
    for (int probe = 0; probe < 100; ++probe) {
      Eigen::VectorXd xi(3);
      for (int i = 0; i < 3; ++i) xi[i] = rng.uniform() - 0.5;
      CHECK(h.energy(xi) >= phi.energy(xi) - 1e-10);
    }
  }

  // geometric contraction of deviations under iteration
  QMatrix dev = (random_irreducible(3, 800) - fp.q) * 0.1;
  double prev = dev.frobenius();
  std::vector<double> ratios;
  for (int it = 0; it < 12; ++it) {
    dev = linearized_map(dev, hm, fp.rho);
    // remove any component along the fixed direction
    double along = (dev.matrix().cwiseProduct(fp.q.matrix())).sum() /
                   fp.q.matrix().squaredNorm();
    dev = dev - fp.q * along;
    double now = dev.frobenius();
    if (it >= 2) ratios.push_back(now / prev);
    prev = now;
  }
  for (double r : ratios) CHECK(r < 0.95);
  // roughly constant rate (geometric decay)
  CHECK(std::abs(ratios.front() - ratios.back()) < 0.2);
}

TEST_CASE("self similarity: constant Q* assignment scales by rho^-n") {
  FractalScheme gasket = gasket_scheme();
  FixedPointResult fp = fixed_point(gasket, QMatrix::uniform(3, 1.0));
  double rho_n = 1.0;
  for (int level = 0; level <= 4; ++level) {
    std::int64_t cells = 1;
    for (int i = 0; i < level; ++i) cells *= 3;
    std::vector<QMatrix> assignment(cells, fp.q);
    QMatrix traced = trace_to_boundary(gasket, level, assignment);
    QMatrix want = fp.q * (1.0 / rho_n);
    CHECK((traced - want).frobenius() / want.frobenius() < 1e-8);
    rho_n *= fp.rho;
  }
}

TEST_CASE("random_iterate: point mass reproduces Q*, heavy tails homogenize") {
  FractalScheme gasket = gasket_scheme();
  FixedPointResult fp = fixed_point(gasket, QMatrix::uniform(3, 1.0));

  // point mass at the unit triangle: every sample is exactly the fixed point
  RandomIterateStats exact = random_iterate(gasket, 2, ConductanceLaw::constant(1.0),
                                            20, 99, false, fp.rho);
  CHECK(exact.rejected == 0);
  CHECK((exact.mean - QMatrix::uniform(3, 1.0)).frobenius() < 1e-9);
  CHECK(exact.entry_variance.cwiseAbs().maxCoeff() < 1e-18);

  // pareto cells: empirical means drift less and less across levels
  ConductanceLaw law = ConductanceLaw::pareto(0.5);
  std::vector<QMatrix> means;
  std::vector<double> variances;
  for (int level = 1; level <= 3; ++level) {
    RandomIterateStats stats = random_iterate(gasket, level, law, 150, 42, false, fp.rho);
    means.push_back(stats.mean);
    variances.push_back(stats.entry_variance.sum() / 9.0);
    CHECK(stats.rejected == 0);
    CHECK(static_cast<int>(stats.sample_norms.size()) == stats.total - stats.rejected);
  }
  double d12 = (means[1] - means[0]).frobenius();
  double d23 = (means[2] - means[1]).frobenius();
  CHECK(d23 < d12);
  CHECK(variances[1] < variances[0]);
  CHECK(variances[2] < variances[1]);

  // exchangeable-within-cell option runs and stays in QM
  RandomIterateStats exch = random_iterate(gasket, 1, law, 50, 43, true, fp.rho);
  CHECK(exch.mean.in_qm(1e-8));
}

TEST_CASE("cell chain distance") {
  FractalGraph g1 = build_fractal_graph(gasket_scheme(), 1);
  auto corners = g1.cells_at(0)[0].boundary;
  // two vertices inside a common cell
  auto cell0 = g1.cells_at(1)[0];
  CHECK(cell_chain_distance(g1, 1, cell0.boundary[0], cell0.boundary[1]) == 1);
  // outer corners of the level-1 gasket sit in different cells joined at a midpoint
  CHECK(cell_chain_distance(g1, 1, corners[0], corners[1]) == 2);

  // h_n between fixed outer corners grows with the depth
  int prev = 0;
  for (int level = 1; level <= 4; ++level) {
    FractalGraph g = build_fractal_graph(gasket_scheme(), level);
    auto c = g.cells_at(0)[0].boundary;
    int h = cell_chain_distance(g, level, c[0], c[1]);
    CHECK(h > prev);
    prev = h;
  }
}
