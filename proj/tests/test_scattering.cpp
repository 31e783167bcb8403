#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qwalk/error.hpp"
#include "qwalk/hamiltonian.hpp"
#include "qwalk/scattering.hpp"

using namespace qwalk;

namespace {

DecisionTree grover(int n) { return build_grover_tree(n, Bitstring(static_cast<std::size_t>(n), 1)); }

// Lead-coupled Green's function on the whole tree; the runway links add one
// to the degree of the root and of the target.
double tree_transmission(const DecisionTree& t, double E) {
  Eigen::MatrixXd h = oracle::laplacian(t);
  h(t.root(), t.root()) += 1.0;
  h(t.unique_target(), t.unique_target()) += 1.0;
  return oracle::lead_transmission(h, t.root(), t.unique_target(), E);
}

// Trimmed tree with a unique level-n node along w, other branches kept at
// random.
DecisionTree random_single_target(int n, std::mt19937& rng) {
  const auto w = unpack_bits(rng() & ((1u << n) - 1), n);
  const std::uint32_t salt = rng();
  auto pred = [salt, w, n](BitView p) {
    const bool on_path = std::equal(p.begin(), p.end(), w.begin());
    if (static_cast<int>(p.size()) == n) return on_path;
    std::uint64_t h = salt ^ (pack_bits(p) * 0x9E3779B97F4A7C15ull) ^ (p.size() << 40);
    h ^= h >> 31;
    h *= 0xBF58476D1CE4E5B9ull;
    h ^= h >> 29;
    return on_path || (h % 10) < 7;
  };
  return trim_tree(n, ConstraintFamily(n, pred));
}

}  // namespace

TEST_CASE("momentum and energy") {
  CHECK(theta_of_energy(3.0) == doctest::Approx(2.0 * std::numbers::pi / 3.0));
  CHECK(theta_of_energy(2.0) == doctest::Approx(std::numbers::pi / 2.0));
  CHECK(energy_of_theta(theta_of_energy(1.234)) == doctest::Approx(1.234));
  CHECK_THROWS_AS(theta_of_energy(4.5), InvalidArgument);
}

TEST_CASE("bush ratios") {
  SUBCASE("single node") {
    for (double E : {0.3, 1.7, 2.9, 5.0}) {
      CHECK(bush_ratio_perfect(1, E).value == doctest::Approx(1.0 / (1.0 - E)));
      CHECK(bush_ratio_generic(ExplicitBush{{-1}}, E).value == doctest::Approx(1.0 / (1.0 - E)));
    }
  }
  SUBCASE("E = 0 gives 1") {
    for (int k = 1; k <= 12; ++k) CHECK(bush_ratio_perfect(k, 0.0).value == doctest::Approx(1.0));
    ExplicitBush lopsided{{-1, 0, 0, 1, 3, 3}};
    CHECK(bush_ratio_generic(lopsided, 0.0).value == doctest::Approx(1.0));
  }
  SUBCASE("E = 3 alternates with parity") {
    for (int k = 1; k <= 20; ++k) {
      CHECK(bush_ratio_perfect(k, 3.0).value == doctest::Approx(k % 2 ? -0.5 : 1.0).epsilon(1e-12));
    }
    CHECK(bush_ratio_perfect(4, 3.0).value == doctest::Approx(1.0));
  }
  SUBCASE("perfect against the generic solve") {
    CHECK(std::abs(bush_ratio_perfect(6, 1.7).value -
                   bush_ratio_generic(ExplicitBush::perfect(6), 1.7).value) < 1e-10);
    CHECK(ExplicitBush::perfect(6).size() == 63);
  }
  SUBCASE("perfect against the continued fraction in every regime") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> energy(0.0, 6.0);
    int checked = 0;
    for (int i = 0; i < 2000; ++i) {
      const double E = energy(rng);
      const int k = 1 + static_cast<int>(rng() % 30);
      BushRatio y;
      try {
        y = bush_ratio_perfect(k, E);
      } catch (const PoleError&) {
        continue;
      }
      if (y.pole_flag) continue;
      const long double ref = oracle::perfect_ratio(k, E);
      CHECK(std::abs(y.value - static_cast<double>(ref)) <= 1e-9 * std::max(1.0, std::abs(y.value)));
      ++checked;
    }
    CHECK(checked > 1500);
  }
  SUBCASE("band edges") {
    const double lo = 3.0 - 2.0 * std::numbers::sqrt2;
    const double hi = 3.0 + 2.0 * std::numbers::sqrt2;
    for (double E : {lo, lo * (1 + 1e-9), lo * (1 - 1e-9), hi, hi * (1 + 1e-12), hi * (1 - 1e-12)}) {
      for (int k : {1, 2, 5, 17}) {
        const double ref = static_cast<double>(oracle::perfect_ratio(k, E));
        CHECK(bush_ratio_perfect(k, E).value == doctest::Approx(ref).epsilon(1e-7));
      }
    }
  }
  SUBCASE("poles") {
    CHECK_THROWS_AS(bush_ratio_perfect(1, 1.0), PoleError);
    try {
      bush_ratio_generic(ExplicitBush{{-1}}, 1.0);
      FAIL("expected a pole");
    } catch (const PoleError& e) {
      CHECK(e.resonance() == doctest::Approx(1.0));
    }
    CHECK(bush_ratio_perfect(1, 1.0 + 1e-11).pole_flag);
  }
}

TEST_CASE("transfer matrices") {
  SUBCASE("bushless base") {
    for (int n : {1, 2, 5, 9}) {
      for (double E : {0.4, 2.0, 3.3}) {
        const double th = theta_of_energy(E);
        const auto m = transfer_matrix(line_form(n), E);
        const double s = std::sin(th);
        const double scale = std::exp(static_cast<double>(m.log_scale));
        CHECK(static_cast<double>(m.a) * scale == doctest::Approx(std::sin((n + 1) * th) / s));
        CHECK(static_cast<double>(m.b) * scale == doctest::Approx(-std::sin(n * th) / s));
        CHECK(static_cast<double>(m.c) * scale == doctest::Approx(std::sin(n * th) / s));
        CHECK(static_cast<double>(m.d) * scale == doctest::Approx(-std::sin((n - 1) * th) / s));
      }
    }
    const auto m = transfer_matrix(line_form(1), 2.0);
    CHECK(std::abs(static_cast<double>(m.a)) < 1e-15);
    CHECK(m.b == -1.0L);
    CHECK(m.c == 1.0L);
    CHECK(m.d == 0.0L);
  }
  SUBCASE("Grover at E = 3 against the eigen-factorization") {
    for (int n = 2; n <= 26; ++n) {
      const auto m = transfer_matrix(grover_form(n), 3.0);
      const Eigen::Matrix2d ref = oracle::grover_M3(n);
      const double scale = std::exp(static_cast<double>(m.log_scale));
      const double tol = 1e-12 * ref.cwiseAbs().maxCoeff();
      CHECK(std::abs(static_cast<double>(m.a) * scale - ref(0, 0)) < tol);
      CHECK(std::abs(static_cast<double>(m.b) * scale - ref(0, 1)) < tol);
      CHECK(std::abs(static_cast<double>(m.c) * scale - ref(1, 0)) < tol);
      CHECK(std::abs(static_cast<double>(m.d) * scale - ref(1, 1)) < tol);
      CHECK(static_cast<double>(m.det()) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("transmission") {
  SUBCASE("free line") {
    for (double E : {0.01, 1.0, 3.9}) CHECK(std::abs(transmission(line_form(7), E).T) == doctest::Approx(1.0));
  }
  SUBCASE("Grover n = 12 at E = 3") {
    const double t = std::abs(transmission(grover_form(12), 3.0).T);
    const auto chain = oracle::perfect_bush_chain(12, oracle::grover_heights(12));
    CHECK(t == doctest::Approx(oracle::lead_transmission(chain.h, chain.first, chain.last, 3.0)).epsilon(1e-10));
    CHECK(t * 64.0 > 0.5);
    CHECK(t * 64.0 < 4.0);
  }
  SUBCASE("against the full-tree Green's function") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> energy(0.05, 3.95);
    for (int rep = 0; rep < 30; ++rep) {
      const auto tree = random_single_target(3 + rep % 6, rng);
      const auto form = to_base_bush_form(tree);
      for (int i = 0; i < 5; ++i) {
        const double E = energy(rng);
        ScatteringResult r;
        try {
          r = transmission(form, E);
        } catch (const PoleError&) {
          continue;
        }
        if (r.pole_flag) continue;
        CHECK(std::abs(r.T) == doctest::Approx(tree_transmission(tree, E)).epsilon(1e-8));
      }
    }
  }
  SUBCASE("perfect-bush chain matches the tree") {
    const auto tree = grover(7);
    const auto chain = oracle::perfect_bush_chain(7, oracle::grover_heights(7));
    for (double E : {0.2, 1.1, 2.5, 3.7}) {
      CHECK(tree_transmission(tree, E) ==
            doctest::Approx(oracle::lead_transmission(chain.h, chain.first, chain.last, E)).epsilon(1e-10));
    }
  }
  SUBCASE("unimpeded transmission on even-bush trees") {
    for (int n : {4, 8, 12, 26}) {
      const auto r = transmission(even_bush_form(n), 3.0);
      CHECK(std::abs(r.T - cplx(1.0, 0.0)) < 1e-10);
    }
  }
  SUBCASE("E to zero") {
    std::mt19937 rng(23);
    for (int n = 2; n <= 6; ++n) {
      CHECK(std::abs(transmission(grover_form(n), 1e-12).T) > 0.99);
      if (n % 2 == 0) CHECK(std::abs(transmission(even_bush_form(n), 1e-12).T) > 0.99);
      CHECK(std::abs(transmission(to_base_bush_form(random_single_target(n, rng)), 1e-12).T) > 0.99);
    }
  }
  SUBCASE("unitarity over random forms and energies") {
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> log_e(-14.0, std::log10(3.999));
    int checked = 0;
    for (int rep = 0; rep < 40; ++rep) {
      const BaseBushForm form = rep % 3 == 0   ? grover_form(4 + rep % 23)
                                : rep % 3 == 1 ? even_bush_form(2 * (2 + rep % 12))
                                               : to_base_bush_form(random_single_target(3 + rep % 7, rng));
      std::vector<double> grid;
      for (int i = 0; i < 40; ++i) grid.push_back(std::pow(10.0, log_e(rng)));
      for (const auto& r : transmission_sweep(form, grid)) {
        if (r.at_pole) continue;
        CHECK(std::abs(std::norm(r.T) + std::norm(r.R) - 1.0) < 1e-8);
        ++checked;
      }
    }
    CHECK(checked > 1000);
  }
  SUBCASE("sweeps keep grid order and mark poles") {
    const auto form = grover_form(3);
    const std::vector<double> grid{0.5, 1.0, 2.0};
    const auto rows = transmission_sweep(form, grid);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].E == 0.5);
    CHECK(rows[1].at_pole);
    CHECK(std::isnan(rows[1].T.real()));
    CHECK(!rows[2].at_pole);
    CHECK_THROWS_AS(transmission(form, 1.0), PoleError);
    CHECK_THROWS_AS(transmission(form, 4.0), InvalidArgument);
  }
}

TEST_CASE("wave packets") {
  const double theta0 = theta_of_energy(3.0);
  SUBCASE("construction") {
    const auto p = make_packet(300, -70, theta0, 12.0);
    CHECK(p.amplitudes.size() == 300);
    CHECK(p.amplitudes.norm() == doctest::Approx(1.0));
    CHECK_THROWS_AS(make_packet(100, -70, theta0, 12.0), InvalidArgument);
    CHECK_THROWS_AS(make_packet(300, -30, theta0, 12.0), InvalidArgument);
  }
  SUBCASE("no bushes") {
    const auto form = line_form(12, 800, 800);
    const auto p = make_packet(800, -70, theta0, 12.0);
    const auto r = packet_transmission(form, p, 300.0);
    CHECK(r.transmitted > 0.95);
    CHECK(r.norm_residual < 1e-9);
  }
  SUBCASE("even-bush n = 12") {
    const auto form = even_bush_form(12, 800, 800);
    const auto r = packet_transmission(form, make_packet(800, -70, theta0, 12.0), 300.0);
    CHECK(r.reduced);
    CHECK(r.transmitted > 0.8);
    CHECK(r.transmitted == doctest::Approx(r.T2_packet_average).epsilon(0.01));
  }
  SUBCASE("Grover n = 12") {
    const auto form = grover_form(12, 800, 800);
    const auto r = packet_transmission(form, make_packet(800, -70, theta0, 12.0), 300.0);
    CHECK(r.transmitted < 0.01);
    CHECK(r.transmitted + r.reflected == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("runways too short for the requested time") {
    const auto form = line_form(4, 200, 200);
    CHECK_THROWS_AS(packet_transmission(form, make_packet(200, -70, theta0, 12.0), 300.0), InvalidArgument);
  }
}

TEST_CASE("bound states") {
  SUBCASE("bare line") {
    const auto t = from_base_bush_form(line_form(5, 60, 60));
    CHECK(bound_state_scan(t, hamiltonian_from_tree(t)).empty());
  }
  SUBCASE("Grover n = 6 with runways") {
    const auto t = attach_runways(grover(6), 50, 50);
    const auto h = hamiltonian_from_tree(t);
    const auto states = bound_state_scan(t, h);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(oracle::laplacian(t)).eigenvalues();
    const bool above_band = (ev.array() > 4.0 + 1e-6).any();
    CHECK(above_band == !states.empty());
    for (const auto& s : states) {
      CHECK(s.energy >= 4.0);
      CHECK(s.energy <= 6.0);
      CHECK(s.consistency < 1e-6);
    }
  }
  SUBCASE("needs a runway") {
    const auto t = grover(4);
    CHECK_THROWS_AS(bound_state_scan(t, hamiltonian_from_tree(t)), InvalidArgument);
  }
}
