#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qwalk/bessel.hpp"
#include "qwalk/error.hpp"
#include "qwalk/evolution.hpp"
#include "qwalk/hamiltonian.hpp"
#include "qwalk/scattering.hpp"

using namespace qwalk;

namespace {

DecisionTree grover(int n) { return build_grover_tree(n, Bitstring(static_cast<std::size_t>(n), 1)); }
DecisionTree path(int nodes) { return from_base_bush_form(line_form(nodes - 1)); }

// e^{-x} I_d(x) = (1/pi) int_0^pi e^{x (cos u - 1)} cos(d u) du.
double scaled_bessel_i(int d, double x) {
  const int points = 4000;
  const double h = std::numbers::pi / points;
  double sum = 0.5 * (1.0 + std::exp(-2.0 * x) * std::cos(d * std::numbers::pi));
  for (int i = 1; i < points; ++i) {
    const double u = i * h;
    sum += std::exp(x * (std::cos(u) - 1.0)) * std::cos(d * u);
  }
  return sum * h / std::numbers::pi;
}

}  // namespace

TEST_CASE("classical two-node walk") {
  const auto h = hamiltonian_from_tree(path(2));
  const Propagator prop(h);
  for (double t : {0.0, 0.3, 1.0, 4.0}) {
    const auto p = prop.classical(0, t);
    CHECK(p.values[1] == doctest::Approx((1.0 - std::exp(-2.0 * t)) / 2.0).epsilon(1e-13));
    CHECK(p.total() == doctest::Approx(1.0).epsilon(1e-14));
  }
  const auto p0 = prop.classical(1, 0.0);
  CHECK(p0.values[0] == 0.0);
  CHECK(p0.values[1] == 1.0);
}

TEST_CASE("classical walk on a Grover tree") {
  const auto tree = grover(8);
  const auto h = hamiltonian_from_tree(tree);
  const auto p = classical_propagate(h, tree.root(), 20.0);
  const Eigen::MatrixXd ref = oracle::heat_kernel(oracle::laplacian(tree), 20.0);
  CHECK((p.values - ref.col(tree.root())).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(p.values[tree.unique_target()] <= 10.0 / 256.0);
  CHECK(std::abs(p.total() - 1.0) < 1e-12);
}

TEST_CASE("quantum two-node walk") {
  const auto h = hamiltonian_from_tree(path(2));
  const Propagator prop(h);
  for (double t : {0.0, 0.5, 1.3, 7.0}) {
    const auto psi = prop.quantum(StateVector::basis(2, 1), t);
    CHECK(std::norm(psi.amplitudes[0]) == doctest::Approx(std::pow(std::sin(t), 2)).epsilon(1e-13));
    CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-14));
  }
  const auto same = prop.quantum(StateVector::basis(2, 0), 0.0);
  CHECK(same.amplitudes[0] == cplx(1.0, 0.0));
}

TEST_CASE("dense propagation against the matrix exponential") {
  const auto tree = attach_runways(build_even_bush_tree(6, parse_bits("110101")), 15, 10);
  const Eigen::MatrixXd lap = oracle::laplacian(tree);
  const auto h = hamiltonian_from_tree(tree);
  const Propagator prop(h);
  REQUIRE(prop.is_dense());
  for (double t : {0.7, 3.0, 12.5}) {
    const Eigen::MatrixXcd u = oracle::unitary(lap, t);
    const auto psi = prop.quantum(StateVector::basis(h.dim(), tree.root()), t);
    CHECK((psi.amplitudes - u.col(tree.root())).cwiseAbs().maxCoeff() < 1e-11);
    const Eigen::VectorXcd cheb =
        chebyshev_expm(h, Eigen::VectorXcd::Unit(h.dim(), tree.root()), t, 1e-13);
    CHECK((cheb - u.col(tree.root())).cwiseAbs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("large-graph paths against line kernels") {
  // 2501 sites: above the dense limit, so quantum uses Chebyshev and classical
  // uses uniformization.
  const int nodes = 2501;
  const int center = nodes / 2;
  const auto h = hamiltonian_from_tree(path(nodes));
  const Propagator prop(h);
  REQUIRE(!prop.is_dense());
  const double t = 10.0;

  const auto psi = prop.quantum(StateVector::basis(nodes, center), t);
  CHECK(psi.error_bound < 1e-10);
  CHECK(std::abs(psi.norm() - 1.0) < 1e-12);
  for (int d = -40; d <= 40; d += 5) {
    const cplx ref = std::polar(1.0, -2.0 * t) * std::pow(cplx(0.0, 1.0), std::abs(d)) *
                     oracle::bessel_quadrature(std::abs(d), 2.0 * t);
    CHECK(std::abs(psi.amplitudes[center + d] - ref) < 1e-10);
  }

  const auto p = prop.classical(center, t);
  CHECK(std::abs(p.total() - 1.0) < 1e-12);
  for (int d = 0; d <= 40; d += 4) {
    CHECK(p.values[center + d] == doctest::Approx(scaled_bessel_i(d, 2.0 * t)).epsilon(1e-10));
  }
}

TEST_CASE("Bessel functions") {
  CHECK(bessel_j(0, 0.0) == 1.0);
  CHECK(bessel_j(3, 0.0) == 0.0);
  CHECK(std::abs(bessel_j(5, 20.0) - oracle::bessel_quadrature(5, 20.0)) < 1e-10);
  for (int d : {0, 1, 7, 30, 55}) {
    for (double x : {0.1, 2.5, 20.0, 61.0}) {
      CHECK(std::abs(bessel_j(d, x) - oracle::bessel_quadrature(d, x)) < 1e-12);
    }
  }
  CHECK(bessel_j(-3, 4.0) == doctest::Approx(-bessel_j(3, 4.0)));
  CHECK(std::abs(bessel_reference(0, 0.0) - cplx(1.0, 0.0)) < 1e-15);
  // Far outside the light cone.
  CHECK(std::abs(bessel_reference(40, 10.0)) < 1e-3);
  CHECK(std::abs(bessel_reference(30, 10.0)) < 1e-3);
  CHECK_THROWS_AS(bessel_reference(201, 1.0), InvalidArgument);
}

TEST_CASE("Bessel line on a 401-site chain") {
  const int nodes = 401;
  const int center = 200;
  const auto h = hamiltonian_from_tree(path(nodes));
  const Propagator prop(h);
  for (double t : {1.0, 5.0, 10.0}) {
    const auto psi = prop.quantum(StateVector::basis(nodes, center), t);
    for (int d = -30; d <= 30; ++d) {
      CHECK(std::abs(psi.amplitudes[center + d] - bessel_reference(d, t)) < 1e-6);
    }
  }
}

TEST_CASE("probability and norm conservation") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> time(0.0, 30.0);
  const auto tree = attach_runways(grover(7), 40, 40);
  const auto h = hamiltonian_from_tree(tree);
  const Propagator prop(h);
  for (int i = 0; i < 50; ++i) {
    const int start = static_cast<int>(rng() % tree.size());
    const double t = time(rng);
    CHECK(std::abs(prop.classical(start, t).total() - 1.0) < 1e-9);
    CHECK(std::abs(prop.quantum(StateVector::basis(h.dim(), start), t).norm() - 1.0) < 1e-9);
  }
}

TEST_CASE("penetrability probe") {
  SUBCASE("three-node line, quantum") {
    const auto tree = path(3);
    const auto h = hamiltonian_from_tree(tree);
    const auto rep = penetrability_probe(tree, h, WalkMode::Quantum, 5.0);
    const Eigen::MatrixXd lap = oracle::path_laplacian(3);
    double best = 0.0;
    for (std::size_t i = 0; i < rep.t_grid.size(); ++i) {
      const double ref = std::norm(oracle::unitary(lap, rep.t_grid[i])(2, 0));
      CHECK(std::abs(rep.prob_target[i] - ref) < 1e-12);
      best = std::max(best, ref);
    }
    CHECK(rep.max_prob == doctest::Approx(best));
    // The exact maximum over [0, 5] is 3/4, near t = 2.1.
    CHECK(rep.max_prob == doctest::Approx(0.75).epsilon(1e-3));
  }
  SUBCASE("Grover classical, quarter per two levels") {
    double prev = 0.0;
    for (int n : {6, 8, 10}) {
      const auto tree = grover(n);
      const auto h = hamiltonian_from_tree(tree);
      const auto rep = penetrability_probe(tree, h, WalkMode::Classical, 50.0);
      for (double r : rep.norm_residual) CHECK(r < 1e-9);
      if (n == 6) {
        const Eigen::MatrixXd ref = oracle::heat_kernel(oracle::laplacian(tree), rep.argmax_t);
        CHECK(rep.max_prob == doctest::Approx(ref(tree.unique_target(), tree.root())).epsilon(1e-10));
      } else {
        const double ratio = prev / rep.max_prob;
        CHECK(ratio > 3.5);
        CHECK(ratio < 4.5);
      }
      prev = rep.max_prob;
    }
  }
  SUBCASE("even-bush trees pass a packet at E = 3") {
    const int L = 200;
    const double theta0 = theta_of_energy(3.0);
    const auto packet = make_packet(L, -70, theta0, 12.0);
    for (int n : {8, 10, 12}) {
      const auto tree = from_base_bush_form(even_bush_form(n, L, L));
      const auto h = hamiltonian_from_tree(tree);
      StateVector psi0{Eigen::VectorXcd::Zero(tree.size()), 0.0, 0.0};
      for (int i = 0; i < L; ++i) psi0.amplitudes[tree.nodes_at_level(-L + i)[0]] = packet.amplitudes[i];
      const auto rep = penetrability_probe(tree, h, WalkMode::Quantum, 70.0, 0.5, psi0);
      CHECK(rep.max_prob >= 0.1);
      for (double r : rep.norm_residual) CHECK(r < 1e-9);
    }
  }
}

TEST_CASE("Cauchy relation") {
  SUBCASE("two nodes") {
    const auto h = hamiltonian_from_tree(path(2));
    const auto c = cauchy_relation_check(h, 0, 1, 1.0, 100.0);
    CHECK(c.discrepancy < 0.05);
    CHECK(c.classical == doctest::Approx((1.0 - std::exp(-2.0)) / 2.0).epsilon(1e-12));
    const auto c10 = cauchy_relation_check(h, 0, 1, 1.0, 1000.0);
    CHECK(c10.discrepancy < c.discrepancy);
  }
  SUBCASE("four-node path") {
    const auto h = hamiltonian_from_tree(path(4));
    double prev = 1.0;
    for (double cut : {20.0, 200.0, 2000.0}) {
      const auto c = cauchy_relation_check(h, 0, 3, 2.0, cut);
      CHECK(c.discrepancy < prev);
      prev = c.discrepancy;
    }
    CHECK(cauchy_relation_check(h, 0, 3, 2.0, 200.0).discrepancy < 0.05);
  }
}
