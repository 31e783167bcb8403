#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "qwalk/error.hpp"
#include "qwalk/hamiltonian.hpp"

using namespace qwalk;

namespace {

DecisionTree grover(int n) { return build_grover_tree(n, Bitstring(static_cast<std::size_t>(n), 1)); }

}  // namespace

TEST_CASE("two-node Hamiltonian") {
  const auto t = from_base_bush_form(line_form(1));
  const auto h = hamiltonian_from_tree(t);
  CHECK(h.dim() == 2);
  CHECK(h.entry(0, 0) == 1.0);
  CHECK(h.entry(1, 1) == 1.0);
  CHECK(h.entry(0, 1) == -1.0);
  CHECK(h.entry(1, 0) == -1.0);

  const auto s = spectrum(h);
  CHECK(s.values[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(s.values[1] == doctest::Approx(2.0).epsilon(1e-14));

  const auto h2 = hamiltonian_from_tree(t, 0.5);
  CHECK(h2.entry(0, 1) == -0.5);
  CHECK(h2.entry(0, 0) == 0.5);
}

TEST_CASE("matches the edge-list Laplacian") {
  for (const auto& t : {build_underlying_tree(4), attach_runways(grover(5), 4, 3),
                        build_even_bush_tree(6, parse_bits("101101"))}) {
    const Eigen::MatrixXd ref = oracle::laplacian(t);
    const Eigen::MatrixXd got = hamiltonian_from_tree(t).dense();
    CHECK((ref - got).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("runway interior sites") {
  const auto t = attach_runways(grover(4), 10, 10);
  const auto h = hamiltonian_from_tree(t);
  const int mid = t.nodes_at_level(-5)[0];
  CHECK(h.entry(mid, mid) == 2.0);

  const auto alt = hamiltonian_from_tree(t, 1.0, RunwayWeights::alternative());
  CHECK(alt.entry(mid, mid) == 3.0);
  const int next = t.nodes_at_level(-6)[0];
  CHECK(alt.entry(mid, next) == -1.5);
  // Junction with the tree keeps its degree-based values.
  const int first = t.nodes_at_level(-1)[0];
  CHECK(alt.entry(first, t.root()) == -1.0);
  CHECK(alt.entry(t.root(), t.root()) == h.entry(t.root(), t.root()));
}

TEST_CASE("spectrum inside [0, 6]") {
  const auto t = attach_runways(grover(6), 20, 20);
  const auto h = hamiltonian_from_tree(t);
  CHECK(h.gershgorin_lower() >= 0.0);
  CHECK(h.gershgorin_upper() <= 6.0);
  const auto s = spectrum(h, true);
  CHECK(s.values.minCoeff() > -1e-12);
  CHECK(s.values.maxCoeff() < 6.0);
  CHECK(s.residual < 1e-12);
}

TEST_CASE("zero mode") {
  CHECK(zero_mode_check(hamiltonian_from_tree(from_base_bush_form(line_form(2)))) == 0.0);
  CHECK(zero_mode_check(hamiltonian_from_tree(grover(8))) < 1e-12);
  CHECK(zero_mode_check(hamiltonian_from_tree(attach_runways(grover(7), 30, 30))) < 1e-12);
}

TEST_CASE("open chain spectrum") {
  const int n = 12;
  const auto h = hamiltonian_from_tree(from_base_bush_form(line_form(n - 1)));
  const auto s = spectrum(h);
  for (int k = 0; k < n; ++k) {
    CHECK(s.values[k] == doctest::Approx(2.0 - 2.0 * std::cos(std::numbers::pi * k / n)).epsilon(1e-12));
  }
}

TEST_CASE("effective chain") {
  SUBCASE("height-1 bush") {
    BaseBushForm f{2, {PerfectBush{1}}, 0, 0, Bitstring(1, 1)};
    const auto c = reduce_perfect_bushes(f);
    CHECK(c.h.dim() == 4);
    const int side = 3;
    CHECK(c.origin[side].height == 1);
    CHECK(c.h.entry(c.base_site(0), side) == -1.0);
    CHECK(c.h.entry(side, side) == 1.0);
  }
  SUBCASE("height-3 bush") {
    BaseBushForm f{2, {PerfectBush{3}}, 0, 0, Bitstring(1, 1)};
    const auto c = reduce_perfect_bushes(f);
    std::vector<int> sites;
    for (int i = 0; i < c.h.dim(); ++i) {
      if (c.origin[i].height > 0) sites.push_back(i);
    }
    REQUIRE(sites.size() == 3);
    CHECK(c.h.entry(c.base_site(0), sites[0]) == -1.0);
    CHECK(c.h.entry(sites[0], sites[1]) == doctest::Approx(-std::numbers::sqrt2));
    CHECK(c.h.entry(sites[1], sites[2]) == doctest::Approx(-std::numbers::sqrt2));
    CHECK(c.h.entry(sites[0], sites[0]) == 3.0);
    CHECK(c.h.entry(sites[1], sites[1]) == 3.0);
    CHECK(c.h.entry(sites[2], sites[2]) == 1.0);
  }
  SUBCASE("same dynamics as the full tree") {
    const int n = 8;
    const int L = 20;
    const auto form = grover_form(n, L, L);
    const auto tree = from_base_bush_form(form);
    const auto chain = reduce_perfect_bushes(form);
    const double t = 5.0;
    const Eigen::MatrixXcd u_tree = oracle::unitary(oracle::laplacian(tree), t);
    const Eigen::MatrixXcd u_chain = oracle::unitary(chain.h.dense(), t);
    const int root = tree.root();
    const int target = tree.unique_target();
    CHECK(std::abs(u_tree(target, root) - u_chain(chain.base_site(n), chain.base_site(0))) < 1e-10);
    const int far = tree.nodes_at_level(-L)[0];
    CHECK(std::abs(u_tree(target, far) - u_chain(chain.base_site(n), chain.base_site(-L))) < 1e-10);
  }
  SUBCASE("explicit bushes are refused") {
    BaseBushForm f{2, {ExplicitBush::perfect(2)}, 0, 0, Bitstring(1, 1)};
    CHECK_THROWS_AS(reduce_perfect_bushes(f), InvalidArgument);
  }
}
