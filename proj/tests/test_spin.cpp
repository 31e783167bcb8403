#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qwalk/error.hpp"
#include "qwalk/spin.hpp"

using namespace qwalk;

namespace {

Eigen::VectorXcd root_state(const SpinLayout& layout) {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(Eigen::Index{1} << layout.bits());
  psi[static_cast<Eigen::Index>(layout.node_index({}))] = 1.0;
  return psi;
}

Eigen::VectorXcd exact_evolve(const std::vector<LocalTerm>& terms, int bits,
                              const Eigen::VectorXcd& psi, double t) {
  return oracle::unitary(terms_hamiltonian(terms, bits).dense(), t) * psi;
}

double trotter_error(const std::vector<LocalTerm>& terms, int bits, const Eigen::VectorXcd& psi0,
                     const Eigen::VectorXcd& exact, double t, int m) {
  return (trotter_evolve(terms, bits, psi0, make_trotter_plan(terms, t, m)) - exact).norm();
}

}  // namespace

TEST_CASE("layout") {
  const SpinLayout l{3};
  CHECK(l.bits() == 7);
  CHECK(l.node_index({}) == 1);
  // Level 2, x_1 = 1, x_2 = 0: y_2 and x_1 set.
  CHECK(l.node_index(parse_bits("10")) == ((1u << 2) | (1u << 4)));
}

TEST_CASE("untrimmed terms") {
  const auto t1 = assemble_tree_terms(1);
  int diagonal = 0;
  int hops = 0;
  for (const auto& term : t1) (term.diagonal ? diagonal : hops)++;
  CHECK(diagonal == 2);
  CHECK(hops == 2);

  for (int n = 1; n <= 5; ++n) {
    const auto terms = assemble_tree_terms(n);
    for (const auto& term : terms) {
      CHECK(term.support.size() <= 3);
      CHECK((term.block - term.block.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
    const SpinLayout layout{n};
    const auto tree = build_underlying_tree(n);
    const Eigen::MatrixXd projected = project_to_tree(terms, layout, tree);
    CHECK((projected - oracle::laplacian(tree)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("evolution stays on the tree") {
  const int n = 4;
  const SpinLayout layout{n};
  const auto terms = assemble_tree_terms(n);
  Eigen::VectorXcd psi = exact_evolve(terms, layout.bits(), root_state(layout), 3.0);
  for (auto idx : tree_basis_indices(layout, build_underlying_tree(n))) psi[static_cast<Eigen::Index>(idx)] = 0.0;
  CHECK(psi.norm() < 1e-10);
}

TEST_CASE("trimmed terms") {
  SUBCASE("untouched columns reduce to the plain tree") {
    const ExactCoverInstance inst(8, {{4, 5, 6}, {5, 6, 7}, {4, 6, 7}, {4, 5, 7}});
    for (int n : {1, 2, 3, 4}) {
      const Eigen::MatrixXd a = terms_hamiltonian(assemble_trimmed_terms(inst, n), 2 * n + 1).dense();
      const Eigen::MatrixXd b = terms_hamiltonian(assemble_tree_terms(n), 2 * n + 1).dense();
      CHECK((a - b).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
  SUBCASE("projection equals the trimmed tree Hamiltonian") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const auto inst = generate_restricted_instance(6 + static_cast<int>(seed % 4) * 2, seed);
      for (int n = 1; n <= 5; ++n) {
        const auto terms = assemble_trimmed_terms(inst, n);
        for (const auto& term : terms) CHECK(term.support.size() <= 9);
        const SpinLayout layout{n};
        const auto tree = trim_tree(n, exact_cover_family(inst));
        const Eigen::MatrixXd projected = project_to_tree(terms, layout, tree);
        CHECK((projected - oracle::laplacian(tree)).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }
  SUBCASE("non-restricted instances are refused") {
    CHECK_THROWS_AS(assemble_trimmed_terms(ExactCoverInstance(6, {{0, 1}}), 3), ContractError);
  }
}

TEST_CASE("Trotter evolution") {
  SUBCASE("diagonal terms commute") {
    const int n = 3;
    const SpinLayout layout{n};
    std::vector<LocalTerm> diag;
    for (const auto& term : assemble_tree_terms(n)) {
      if (term.diagonal) diag.push_back(term);
    }
    Eigen::VectorXcd psi0 = Eigen::VectorXcd::Constant(Eigen::Index{1} << layout.bits(), 1.0);
    psi0.normalize();
    const Eigen::VectorXcd exact = exact_evolve(diag, layout.bits(), psi0, 1.7);
    for (int m : {1, 3, 10}) CHECK(trotter_error(diag, layout.bits(), psi0, exact, 1.7, m) < 1e-12);
  }
  SUBCASE("n = 3, t = 2, m = 64") {
    const SpinLayout layout{3};
    const auto terms = assemble_tree_terms(3);
    const auto psi0 = root_state(layout);
    const Eigen::VectorXcd exact = exact_evolve(terms, layout.bits(), psi0, 2.0);
    const auto approx = trotter_evolve(terms, layout.bits(), psi0, make_trotter_plan(terms, 2.0, 64));
    CHECK(std::abs(exact.dot(approx)) > 0.999);
    CHECK(approx.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("first-order error halves per doubling") {
    const SpinLayout layout{3};
    const auto terms = assemble_tree_terms(3);
    const auto psi0 = root_state(layout);
    const Eigen::VectorXcd exact = exact_evolve(terms, layout.bits(), psi0, 2.0);
    double prev = trotter_error(terms, layout.bits(), psi0, exact, 2.0, 16);
    for (int m : {32, 64, 128, 256}) {
      const double err = trotter_error(terms, layout.bits(), psi0, exact, 2.0, m);
      CHECK(err / prev > 0.4);
      CHECK(err / prev < 0.6);
      prev = err;
    }
  }
  SUBCASE("plan order") {
    const auto terms = assemble_tree_terms(2);
    const auto plan = make_trotter_plan(terms, 1.0, 4);
    CHECK(plan.order.size() == terms.size());
    bool seen_hop = false;
    for (int idx : plan.order) {
      if (!terms[idx].diagonal) seen_hop = true;
      CHECK(!(seen_hop && terms[idx].diagonal));
    }
    CHECK_THROWS_AS(make_trotter_plan(terms, 1.0, 0), InvalidArgument);
  }
}

TEST_CASE("term dump") {
  const auto text = dump_terms(assemble_tree_terms(1));
  CHECK(std::count(text.begin(), text.end(), '\n') >= 4);
}
