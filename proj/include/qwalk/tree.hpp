#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "qwalk/bits.hpp"

namespace qwalk {

// Deepest underlying tree we are willing to materialize (2^25 - 1 nodes).
inline constexpr int kMaxTreeDepth = 24;

struct NodeRecord {
  int id;
  int level;
};

using Edge = std::pair<int, int>;

// A decision tree, optionally with runways: a chain at levels -1, -2, ...
// hanging off the root and a chain at levels n+1, n+2, ... hanging off the
// unique level-n node.
//
// Node ids are dense and level-major; within a level nodes are ordered by
// their parent's id and then by child rank (0-branch before 1-branch), which
// is lexicographic order for trees built from bit prefixes. Every constructor
// validates the tree invariants and throws InvalidArgument on violation.
// Instances are immutable once built.
class DecisionTree {
 public:
  // `labels[id]` is the packed bit prefix of a node, or -1 when unknown (runway
  // nodes, trees loaded from JSON). Pass an empty vector for no labels.
  DecisionTree(int n_levels, std::vector<int> levels, std::vector<Edge> edges,
               int root, std::vector<int> targets,
               std::vector<std::int64_t> labels = {});

  int n_levels() const { return n_levels_; }
  int size() const { return static_cast<int>(levels_.size()); }
  int level(int id) const { return levels_.at(id); }
  const std::vector<int>& levels() const { return levels_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::span<const int> neighbors(int id) const;
  int degree(int id) const { return static_cast<int>(neighbors(id).size()); }
  int root() const { return root_; }
  const std::vector<int>& targets() const { return targets_; }

  // Throws InvalidArgument unless exactly one node sits at level n.
  int unique_target() const;

  // Neighbor one level down toward the root, or -1 for the root and the start
  // runway.
  int parent(int id) const;
  // Neighbors one level further from the root, in id order. Start-runway
  // nodes have none.
  std::vector<int> children(int id) const;
  std::vector<int> nodes_at_level(int level) const;

  int start_runway_length() const { return start_runway_; }
  int end_runway_length() const { return end_runway_; }
  bool is_runway(int id) const;

  bool has_labels() const { return !labels_.empty(); }
  std::optional<Bitstring> label(int id) const;

  std::vector<NodeRecord> nodes() const;

  // Structural equality: depth, levels, edges, root and targets. Labels are
  // annotations and do not participate.
  friend bool operator==(const DecisionTree& a, const DecisionTree& b);

 private:
  void validate() const;

  int n_levels_;
  std::vector<int> levels_;
  std::vector<Edge> edges_;
  int root_;
  std::vector<int> targets_;
  std::vector<std::int64_t> labels_;
  std::vector<int> adj_offsets_;
  std::vector<int> adj_;
  int start_runway_ = 0;
  int end_runway_ = 0;
};

// Family of level predicates f_i(x_1..x_i), i = prefix.size(). Every
// evaluation increments a call counter shared between copies.
class ConstraintFamily {
 public:
  using Predicate = std::function<bool(BitView prefix)>;

  ConstraintFamily(int n, Predicate f);

  int n() const { return n_; }
  bool operator()(BitView prefix) const;
  long calls() const { return calls_->load(); }
  void reset_calls() const { calls_->store(0); }

 private:
  int n_;
  Predicate f_;
  std::shared_ptr<std::atomic<long>> calls_;
};

DecisionTree build_underlying_tree(int n);

// Keeps node x_1..x_i iff f_j(x_1..x_j) = 1 for every j <= i. Subtrees below
// an excluded node are never generated. Dead ends above level n are kept.
DecisionTree trim_tree(int n, const ConstraintFamily& f);

// Bifurcating through level n-1; the only level-n node extends w_1..w_{n-1}
// by w_n.
DecisionTree build_grover_tree(int n, BitView w);

// Level n-1 predicate of the even-bush family: x_1..x_{n-1} is excluded when
// its first disagreement with w sits at an odd (1-based) position.
bool even_bush_allows(BitView prefix, BitView w);

// Grover tree along w with every odd-height bush trimmed by one layer. n must
// be even.
DecisionTree build_even_bush_tree(int n, BitView w);

// Appends a chain of `start_len` nodes below the root (levels -1..-start_len)
// and `end_len` nodes past the unique target (levels n+1..n+end_len). The input
// must not already carry runways.
DecisionTree attach_runways(const DecisionTree& t, int start_len, int end_len);

// Default runway length for evolutions up to t_max, from the speed-2 spreading
// of amplitude on a line.
int default_runway_length(double t_max);

struct NoBush {
  friend bool operator==(const NoBush&, const NoBush&) = default;
};

// 2^(l-1) nodes at each height l = 1..height.
struct PerfectBush {
  int height = 0;
  friend bool operator==(const PerfectBush&, const PerfectBush&) = default;
};

// Arbitrary hanging subtree. Node 0 is the node one level above the base node;
// parent[0] == -1 and every other parent index precedes its child. Siblings keep
// their relative order.
struct ExplicitBush {
  std::vector<int> parent;

  int size() const { return static_cast<int>(parent.size()); }
  int height() const;
  // Height (1-based distance from the base node) of every bush node.
  std::vector<int> heights() const;
  // Materializes a perfect bush explicitly.
  static ExplicitBush perfect(int height);

  friend bool operator==(const ExplicitBush&, const ExplicitBush&) = default;
};

using BushSpec = std::variant<NoBush, PerfectBush, ExplicitBush>;

int bush_height(const BushSpec& spec);
int bush_size(const BushSpec& spec);

// The tree redrawn along the root-to-target base path (positions 0..n), with
// the subtrees hanging off base positions 0..n-2 and the runway lengths.
struct BaseBushForm {
  int base_length = 0;
  std::vector<BushSpec> bushes;  // size base_length - 1
  int start_runway = 0;
  int end_runway = 0;
  // base_bits[j] is the child rank of base node j+1 under base node j when
  // base node j also carries a bush (0: base child comes first); 0 otherwise.
  Bitstring base_bits;

  int total_nodes() const;
  friend bool operator==(const BaseBushForm&, const BaseBushForm&) = default;
};

// Throws InvalidArgument when the tree has no unique level-n node.
BaseBushForm to_base_bush_form(const DecisionTree& t);
DecisionTree from_base_bush_form(const BaseBushForm& b);

// Plain line 0..n with optional runways and no bushes.
BaseBushForm line_form(int n, int start_runway = 0, int end_runway = 0);
// Grover tree along the all-ones path, expressed with perfect bushes.
BaseBushForm grover_form(int n, int start_runway = 0, int end_runway = 0);
// Even-bush tree: odd-height bushes of the Grover form cut back by one.
BaseBushForm even_bush_form(int n, int start_runway = 0, int end_runway = 0);

std::string tree_to_json(const DecisionTree& t);
DecisionTree tree_from_json(std::string_view text);

}  // namespace qwalk
