#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "qwalk/bits.hpp"
#include "qwalk/tree.hpp"

namespace qwalk {

// Exact cover: find x in {0,1}^n with every row of A summing to exactly 1.
// Columns are 0-based in storage; x_k (1-based) belongs to column k - 1.
class ExactCoverInstance {
 public:
  // Rows list their column indices. Requires m <= n, indices in range and no
  // repeated column within a row.
  ExactCoverInstance(int n, std::vector<std::vector<int>> rows);

  int m() const { return static_cast<int>(rows_.size()); }
  int n() const { return n_; }
  const std::vector<std::vector<int>>& rows() const { return rows_; }
  // Rows containing column `col`.
  const std::vector<int>& rows_with(int col) const { return col_rows_.at(col); }
  int at(int row, int col) const;
  // Exactly three 1s per row and at most three per column.
  bool restricted() const { return restricted_; }

  friend bool operator==(const ExactCoverInstance& a, const ExactCoverInstance& b) {
    return a.n_ == b.n_ && a.rows_ == b.rows_;
  }

 private:
  int n_;
  std::vector<std::vector<int>> rows_;
  std::vector<std::vector<int>> col_rows_;
  bool restricted_ = false;
};

// {"m": int, "n": int, "rows": [[0-based column indices]]}
std::string instance_to_json(const ExactCoverInstance& inst);
ExactCoverInstance instance_from_json(std::string_view text);

inline constexpr int kMaxBruteForceColumns = 24;

// All solutions in lexicographic order.
std::vector<Bitstring> brute_force_solve(const ExactCoverInstance& inst);

// True iff no row of A sums above 1 on x_1..x_i and every row whose columns
// all lie within the prefix sums to exactly 1.
bool prefix_feasible(const ExactCoverInstance& inst, BitView prefix);

// Prefix bits read while evaluating a constraint, 1-based, in read order.
struct AccessTrace {
  std::vector<int> reads;
  int distinct() const;
};

// C1_i on x_1..x_i (i = prefix.size() < n): 1 unless some row containing
// column i+1 already has a 1 among its earlier columns.
bool constraint_c1(const ExactCoverInstance& inst, BitView prefix, AccessTrace* trace = nullptr,
                   bool check_prefix = false);

// C0_i: 0 iff some row containing column i+1 has d = 2, where d counts the
// zeros among that row's earlier columns. Throws ContractError unless the
// instance is restricted.
bool constraint_c0(const ExactCoverInstance& inst, BitView prefix, AccessTrace* trace = nullptr,
                   bool check_prefix = false);

// f_{i+1}(x_1..x_{i+1}) = C1_i when x_{i+1} = 1, C0_i otherwise.
ConstraintFamily exact_cover_family(const ExactCoverInstance& inst);
// The same decision tree from the direct prefix test, for non-restricted
// instances.
ConstraintFamily feasibility_family(const ExactCoverInstance& inst);

DecisionTree exact_cover_tree(const ExactCoverInstance& inst);

// Random restricted instance with n / 2 rows. Deterministic in (n, seed)
// across platforms. Throws ContractError when 10^4 draws fail to place a row.
ExactCoverInstance generate_restricted_instance(int n, std::uint64_t seed);

enum class MarkedVariant { Grover, EvenBush };

// The level predicates of the Grover or even-bush tree along a hidden path w.
// When `marked` is false the level-n predicate is identically 0. Copies share
// one call counter.
class MarkedPathFamily {
 public:
  MarkedPathFamily(int n, Bitstring w, MarkedVariant variant, bool marked = true);

  int n() const { return n_; }
  MarkedVariant variant() const { return variant_; }
  bool marked() const { return marked_; }
  const Bitstring& hidden() const { return w_; }

  bool operator()(BitView prefix) const;
  long calls() const { return *calls_; }
  void reset_calls() const { *calls_ = 0; }

  ConstraintFamily as_family() const;

 private:
  int n_;
  Bitstring w_;
  MarkedVariant variant_;
  bool marked_;
  std::shared_ptr<long> calls_;
};

struct SipserResult {
  Bitstring w;         // w_1..w_{n-1}, then w_n (0 when no leaf was found)
  bool found = false;  // f_n accepted one of the two completions
  long calls = 0;
};

// Recovers w_1..w_{n-1} through f_{n-1} queries, then decides with two f_n
// calls. Each position is settled by a deterministic seeded enumeration of
// the remaining bits. Requires the even-bush variant with n even.
SipserResult sipser_solve(const MarkedPathFamily& fam, std::uint64_t seed = 0);

}  // namespace qwalk
