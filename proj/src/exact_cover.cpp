#include "qwalk/exact_cover.hpp"

#include <algorithm>
#include <bit>
#include <random>
#include <set>

#include <json.hpp>

#include "qwalk/error.hpp"
#include "qwalk/parallel.hpp"

namespace qwalk {

ExactCoverInstance::ExactCoverInstance(int n, std::vector<std::vector<int>> rows)
    : n_(n), rows_(std::move(rows)), col_rows_(static_cast<std::size_t>(std::max(n, 0))) {
  if (n_ < 1) throw InvalidArgument("instance needs at least one column");
  if (static_cast<int>(rows_.size()) > n_) {
    throw InvalidArgument("instance has more rows than columns");
  }
  restricted_ = true;
  for (std::size_t j = 0; j < rows_.size(); ++j) {
    auto& row = rows_[j];
    std::sort(row.begin(), row.end());
    if (std::adjacent_find(row.begin(), row.end()) != row.end()) {
      throw InvalidArgument("row " + std::to_string(j) + " repeats a column");
    }
    for (int c : row) {
      if (c < 0 || c >= n_) {
        throw InvalidArgument("row " + std::to_string(j) + " references column " +
                              std::to_string(c) + " outside 0.." + std::to_string(n_ - 1));
      }
      col_rows_[c].push_back(static_cast<int>(j));
    }
    if (row.size() != 3) restricted_ = false;
  }
  for (const auto& col : col_rows_) {
    if (col.size() > 3) restricted_ = false;
  }
}

int ExactCoverInstance::at(int row, int col) const {
  const auto& r = rows_.at(row);
  return std::binary_search(r.begin(), r.end(), col) ? 1 : 0;
}

std::string instance_to_json(const ExactCoverInstance& inst) {
  nlohmann::json doc = {{"m", inst.m()}, {"n", inst.n()}, {"rows", inst.rows()}};
  return doc.dump();
}

ExactCoverInstance instance_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(std::string("instance JSON does not parse: ") + e.what());
  }
  if (!doc.is_object()) throw InvalidArgument("instance JSON must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "m" && key != "n" && key != "rows") {
      throw InvalidArgument("unknown key in instance JSON: " + key);
    }
  }
  try {
    auto rows = doc.at("rows").get<std::vector<std::vector<int>>>();
    const int m = doc.at("m").get<int>();
    if (m != static_cast<int>(rows.size())) {
      throw InvalidArgument("\"m\" does not match the number of rows");
    }
    return ExactCoverInstance(doc.at("n").get<int>(), std::move(rows));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed instance JSON: ") + e.what());
  }
}

std::vector<Bitstring> brute_force_solve(const ExactCoverInstance& inst) {
  const int n = inst.n();
  if (n > kMaxBruteForceColumns) {
    throw CapacityError("brute force is limited to " + std::to_string(kMaxBruteForceColumns) +
                        " columns");
  }
  // x_1 is the most significant bit, so integer order is lexicographic.
  std::vector<std::uint32_t> masks;
  for (const auto& row : inst.rows()) {
    std::uint32_t mask = 0;
    for (int c : row) mask |= 1u << (n - 1 - c);
    masks.push_back(mask);
  }
  const std::uint64_t total = 1ull << n;
  const std::size_t shards = 64;
  std::vector<std::vector<std::uint32_t>> found(shards);
  parallel_for(shards, [&](std::size_t s) {
    const std::uint64_t lo = total * s / shards;
    const std::uint64_t hi = total * (s + 1) / shards;
    for (std::uint64_t x = lo; x < hi; ++x) {
      bool ok = true;
      for (auto mask : masks) {
        if (std::popcount(static_cast<std::uint32_t>(x) & mask) != 1) {
          ok = false;
          break;
        }
      }
      if (ok) found[s].push_back(static_cast<std::uint32_t>(x));
    }
  });
  std::vector<Bitstring> out;
  for (const auto& shard : found) {
    for (auto x : shard) out.push_back(unpack_bits(x, n));
  }
  return out;
}

bool prefix_feasible(const ExactCoverInstance& inst, BitView prefix) {
  const int i = static_cast<int>(prefix.size());
  if (i > inst.n()) throw InvalidArgument("prefix longer than the instance");
  for (const auto& row : inst.rows()) {
    int sum = 0;
    bool determined = true;
    for (int c : row) {
      if (c < i) {
        sum += prefix[c];
      } else {
        determined = false;
      }
    }
    if (sum > 1 || (determined && sum != 1)) return false;
  }
  return true;
}

int AccessTrace::distinct() const {
  std::set<int> s(reads.begin(), reads.end());
  return static_cast<int>(s.size());
}

namespace {

// Reads x_k (1-based) and optionally records the access.
struct TracedBits {
  BitView bits;
  AccessTrace* trace;

  int operator()(int k) const {
    if (trace) trace->reads.push_back(k);
    return bits[k - 1];
  }
};

void check_constraint_args(const ExactCoverInstance& inst, BitView prefix, bool check_prefix) {
  if (static_cast<int>(prefix.size()) >= inst.n()) {
    throw InvalidArgument("constraint index i must be below n");
  }
  if (check_prefix && !prefix_feasible(inst, prefix)) {
    throw ContractError("prefix " + format_bits(prefix) + " is not an allowed node");
  }
}

template <class Bits>
bool eval_c1(const ExactCoverInstance& inst, int i, const Bits& x) {
  // prod_j [1 - A_{j,i+1} sum_{k<=i} A_{jk} x_k]; only rows with A_{j,i+1} = 1
  // contribute a factor other than 1.
  for (int row : inst.rows_with(i)) {
    int sum = 0;
    for (int c : inst.rows()[row]) {
      if (c < i) sum += x(c + 1);
    }
    if (sum != 0) return false;
  }
  return true;
}

template <class Bits>
bool eval_c0(const ExactCoverInstance& inst, int i, const Bits& x) {
  // prod_j [d (1 - d) / 2 + 1] with d = sum_{k<=i} A_{jk} (1 - x_k).
  for (int row : inst.rows_with(i)) {
    int d = 0;
    for (int c : inst.rows()[row]) {
      if (c < i) d += 1 - x(c + 1);
    }
    if (d * (1 - d) / 2 + 1 == 0) return false;
  }
  return true;
}

}  // namespace

bool constraint_c1(const ExactCoverInstance& inst, BitView prefix, AccessTrace* trace,
                   bool check_prefix) {
  check_constraint_args(inst, prefix, check_prefix);
  return eval_c1(inst, static_cast<int>(prefix.size()), TracedBits{prefix, trace});
}

bool constraint_c0(const ExactCoverInstance& inst, BitView prefix, AccessTrace* trace,
                   bool check_prefix) {
  if (!inst.restricted()) {
    throw ContractError("C0 needs a restricted instance (three 1s per row, at most three per column)");
  }
  check_constraint_args(inst, prefix, check_prefix);
  return eval_c0(inst, static_cast<int>(prefix.size()), TracedBits{prefix, trace});
}

ConstraintFamily exact_cover_family(const ExactCoverInstance& inst) {
  if (!inst.restricted()) {
    throw ContractError("the C0/C1 family needs a restricted instance");
  }
  return ConstraintFamily(inst.n(), [inst](BitView x) {
    const BitView head = x.first(x.size() - 1);
    return x.back() ? constraint_c1(inst, head) : constraint_c0(inst, head);
  });
}

ConstraintFamily feasibility_family(const ExactCoverInstance& inst) {
  return ConstraintFamily(inst.n(), [inst](BitView x) { return prefix_feasible(inst, x); });
}

DecisionTree exact_cover_tree(const ExactCoverInstance& inst) {
  return trim_tree(inst.n(), inst.restricted() ? exact_cover_family(inst)
                                               : feasibility_family(inst));
}

namespace {

// Uniform draw in [0, bound) by rejection, independent of the standard
// library's distribution implementations.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  for (;;) {
    const std::uint64_t v = rng();
    if (v < limit) return v % bound;
  }
}

}  // namespace

ExactCoverInstance generate_restricted_instance(int n, std::uint64_t seed) {
  if (n < 6) throw InvalidArgument("restricted instances need n >= 6");
  if (n > 63) throw CapacityError("restricted instances are limited to 63 columns");
  std::mt19937_64 rng(seed);
  const int m = n / 2;
  std::vector<int> degree(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<int>> rows;
  for (int j = 0; j < m; ++j) {
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      std::vector<int> row;
      while (row.size() < 3) {
        const int c = static_cast<int>(draw_below(rng, static_cast<std::uint64_t>(n)));
        if (std::find(row.begin(), row.end(), c) == row.end()) row.push_back(c);
      }
      std::sort(row.begin(), row.end());
      const bool fits = std::all_of(row.begin(), row.end(), [&](int c) { return degree[c] < 3; });
      if (!fits || std::find(rows.begin(), rows.end(), row) != rows.end()) continue;
      for (int c : row) ++degree[c];
      rows.push_back(std::move(row));
      placed = true;
    }
    if (!placed) {
      throw ContractError("could not place row " + std::to_string(j) + " after 10^4 draws");
    }
  }
  return ExactCoverInstance(n, std::move(rows));
}

// ---------------------------------------------------------------------------

MarkedPathFamily::MarkedPathFamily(int n, Bitstring w, MarkedVariant variant, bool marked)
    : n_(n), w_(std::move(w)), variant_(variant), marked_(marked),
      calls_(std::make_shared<long>(0)) {
  if (n_ < 2) throw InvalidArgument("marked-path family needs n >= 2");
  if (static_cast<int>(w_.size()) != n_) throw InvalidArgument("hidden path must have n bits");
  if (variant_ == MarkedVariant::EvenBush && n_ % 2 != 0) {
    throw InvalidArgument("the even-bush variant is defined for even n only");
  }
}

bool MarkedPathFamily::operator()(BitView x) const {
  ++*calls_;
  const int i = static_cast<int>(x.size());
  if (i < 1 || i > n_) throw InvalidArgument("prefix length outside 1..n");
  if (i == n_) return marked_ && std::equal(x.begin(), x.end(), w_.begin());
  if (i == n_ - 1 && variant_ == MarkedVariant::EvenBush) return even_bush_allows(x, w_);
  return true;
}

ConstraintFamily MarkedPathFamily::as_family() const {
  MarkedPathFamily self = *this;
  return ConstraintFamily(n_, [self](BitView x) { return self(x); });
}

SipserResult sipser_solve(const MarkedPathFamily& fam, std::uint64_t seed) {
  if (fam.variant() != MarkedVariant::EvenBush) {
    throw InvalidArgument("sipser_solve needs the even-bush family");
  }
  const int n = fam.n();
  const long before = fam.calls();
  constexpr int kTries = 16;
  std::mt19937_64 rng(seed);

  Bitstring known;
  Bitstring x(static_cast<std::size_t>(n - 1));
  for (int j = 1; j <= n - 1; ++j) {
    // Suffix x_j..x_{n-1} = base XOR (bits of r), with x_j the fastest bit.
    const int free_bits = n - j;
    Bitstring base(static_cast<std::size_t>(free_bits));
    for (auto& b : base) b = static_cast<std::uint8_t>(draw_below(rng, 2));
    const bool want = (j % 2 == 1);
    const int tries = std::min<long>(kTries, 1L << std::min(free_bits, 20));
    bool settled = false;
    for (int r = 0; r < tries && !settled; ++r) {
      std::copy(known.begin(), known.end(), x.begin());
      for (int b = 0; b < free_bits; ++b) {
        x[j - 1 + b] = static_cast<std::uint8_t>(base[b] ^ ((r >> b) & 1));
      }
      // Odd j: acceptance forces x_j = w_j. Even j: rejection forces it.
      if (fam(x) == want) {
        known.push_back(x[j - 1]);
        settled = true;
      }
    }
    if (!settled) {
      throw ContractError("no informative input for position " + std::to_string(j) + " within " +
                          std::to_string(tries) + " tries; the family is not an even-bush family");
    }
  }

  SipserResult res;
  Bitstring zero = known;
  zero.push_back(0);
  Bitstring one = known;
  one.push_back(1);
  const bool accept0 = fam(zero);
  const bool accept1 = fam(one);
  res.found = accept0 || accept1;
  res.w = (accept1 && !accept0) ? one : zero;
  res.calls = fam.calls() - before;
  return res;
}

}  // namespace qwalk
