#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qwalk/exact_cover.hpp"
#include "qwalk/hamiltonian.hpp"
#include "qwalk/tree.hpp"

// Tree Hamiltonians written as sums of few-bit terms on 2n + 1 bits
// (y_0..y_n, x_1..x_n). A node at level i with label x_1..x_i is the basis
// state with y_i = 1, all other y bits 0, the given x_1..x_i and x_{i+1..n} = 0.

namespace qwalk {

// Global bit positions: y_i at i, x_k at n + k. Basis index bit b is global
// bit b.
struct SpinLayout {
  int n = 0;

  int bits() const { return 2 * n + 1; }
  int y(int i) const { return i; }
  int x(int k) const { return n + k; }
  // Basis index of a tree node at level i with label x_1..x_i.
  std::uint64_t node_index(BitView label) const;
};

// A real symmetric block acting on `support`; local basis bit b of a row or
// column index corresponds to global bit support[b].
struct LocalTerm {
  std::vector<int> support;  // ascending
  Eigen::MatrixXd block;
  bool diagonal = false;
  int level = 0;  // the y level the term hangs on (the lower level for hops)
  std::string name;
};

inline constexpr int kMaxSpinLevels = 6;
inline constexpr int kMaxTermSupport = 9;

// The underlying-tree Hamiltonian with gamma = 1: n + 1 diagonal terms and two
// hop terms per level pair, each on at most three bits.
std::vector<LocalTerm> assemble_tree_terms(int n);

// The same for the tree trimmed by a restricted instance, with the hop terms
// multiplied by C0_i / C1_i and the diagonal y_i (1 + C0_i + C1_i), using the
// first n columns. Throws ContractError when a term would exceed nine bits.
std::vector<LocalTerm> assemble_trimmed_terms(const ExactCoverInstance& inst, int n);

// Sum of the terms as a sparse matrix on 2^bits states.
GraphHamiltonian terms_hamiltonian(const std::vector<LocalTerm>& terms, int bits);

// V^T (sum of terms) V for the isometry V taking tree node ids to basis
// states. The tree must carry labels (built by trim_tree).
Eigen::MatrixXd project_to_tree(const std::vector<LocalTerm>& terms, const SpinLayout& layout,
                                const DecisionTree& t);

// Basis indices of the tree's nodes, in node-id order.
std::vector<std::uint64_t> tree_basis_indices(const SpinLayout& layout, const DecisionTree& t);

struct TrotterPlan {
  double t = 0.0;
  int m = 1;
  std::vector<int> order;  // factors of one slice, left to right; the rightmost acts first
};

// Diagonal factors leftmost, then hops by ascending level.
TrotterPlan make_trotter_plan(const std::vector<LocalTerm>& terms, double t, int m);

inline constexpr int kMaxTrotterBits = 14;

// [prod_k exp(-i t H_k / m)]^m psi0 with the product taken in plan order.
Eigen::VectorXcd trotter_evolve(const std::vector<LocalTerm>& terms, int bits,
                                const Eigen::VectorXcd& psi0, const TrotterPlan& plan);

// One line per term: name, support, then the block row by row.
std::string dump_terms(const std::vector<LocalTerm>& terms);

}  // namespace qwalk
