#include "qwalk/tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "qwalk/error.hpp"

namespace qwalk {

Bitstring parse_bits(std::string_view text) {
  Bitstring out;
  out.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') {
      throw InvalidArgument("bitstring may only contain 0 and 1: '" + std::string(text) + "'");
    }
    out.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return out;
}

std::string format_bits(BitView bits) {
  std::string out;
  out.reserve(bits.size());
  for (auto b : bits) out.push_back(b ? '1' : '0');
  return out;
}

std::uint64_t pack_bits(BitView bits) {
  if (bits.size() > 63) throw CapacityError("cannot pack more than 63 bits");
  std::uint64_t v = 0;
  for (auto b : bits) v = (v << 1) | (b & 1u);
  return v;
}

Bitstring unpack_bits(std::uint64_t packed, int length) {
  Bitstring out(static_cast<std::size_t>(length));
  for (int i = length - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(packed & 1u);
    packed >>= 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// DecisionTree

DecisionTree::DecisionTree(int n_levels, std::vector<int> levels, std::vector<Edge> edges,
                           int root, std::vector<int> targets,
                           std::vector<std::int64_t> labels)
    : n_levels_(n_levels),
      levels_(std::move(levels)),
      edges_(std::move(edges)),
      root_(root),
      targets_(std::move(targets)),
      labels_(std::move(labels)) {
  const int n = size();
  for (auto& e : edges_) {
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(edges_.begin(), edges_.end());
  std::sort(targets_.begin(), targets_.end());

  std::vector<int> deg(static_cast<std::size_t>(n), 0);
  for (const auto& [a, b] : edges_) {
    if (a < 0 || b >= n) throw InvalidArgument("edge references a node outside the tree");
    if (a == b) throw InvalidArgument("self loop at node " + std::to_string(a));
    ++deg[a];
    ++deg[b];
  }
  adj_offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 0; i < n; ++i) adj_offsets_[i + 1] = adj_offsets_[i] + deg[i];
  adj_.assign(static_cast<std::size_t>(adj_offsets_[n]), 0);
  std::vector<int> fill(adj_offsets_.begin(), adj_offsets_.end() - 1);
  for (const auto& [a, b] : edges_) {
    adj_[fill[a]++] = b;
    adj_[fill[b]++] = a;
  }
  for (int i = 0; i < n; ++i) {
    std::sort(adj_.begin() + adj_offsets_[i], adj_.begin() + adj_offsets_[i + 1]);
  }
  for (int l : levels_) {
    if (l < 0) ++start_runway_;
    if (l > n_levels_) ++end_runway_;
  }
  validate();
}

std::span<const int> DecisionTree::neighbors(int id) const {
  if (id < 0 || id >= size()) throw InvalidArgument("node id out of range: " + std::to_string(id));
  return {adj_.data() + adj_offsets_[id],
          static_cast<std::size_t>(adj_offsets_[id + 1] - adj_offsets_[id])};
}

void DecisionTree::validate() const {
  const int n = size();
  if (n_levels_ < 0) throw InvalidArgument("n must be non-negative");
  if (n == 0) throw InvalidArgument("tree has no nodes");
  if (static_cast<int>(edges_.size()) != n - 1) {
    throw InvalidArgument("a tree on " + std::to_string(n) + " nodes needs " +
                          std::to_string(n - 1) + " edges, got " + std::to_string(edges_.size()));
  }
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i] == edges_[i - 1]) throw InvalidArgument("duplicate edge");
  }
  if (root_ < 0 || root_ >= n || levels_[root_] != 0) {
    throw InvalidArgument("root must be a node at level 0");
  }
  if (!labels_.empty() && static_cast<int>(labels_.size()) != n) {
    throw InvalidArgument("label count does not match node count");
  }
  for (int i = 1; i < n; ++i) {
    if (levels_[i] < levels_[i - 1]) throw InvalidArgument("node ids must be level-major");
  }
  for (const auto& [a, b] : edges_) {
    if (std::abs(levels_[a] - levels_[b]) != 1) {
      throw InvalidArgument("edge " + std::to_string(a) + "-" + std::to_string(b) +
                            " does not join adjacent levels");
    }
  }

  // Connectivity.
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::deque<int> queue{root_};
  seen[root_] = 1;
  int reached = 1;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (int v : neighbors(u)) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        queue.push_back(v);
      }
    }
  }
  if (reached != n) throw InvalidArgument("tree is not connected");

  int prev_parent = -1;
  int prev_level = levels_[0];
  for (int id = 0; id < n; ++id) {
    const int l = levels_[id];
    if (degree(id) > 3) throw InvalidArgument("node " + std::to_string(id) + " has degree > 3");
    if (l == 0 && id != root_) throw InvalidArgument("only the root may sit at level 0");
    if (l < 0) {
      // Start runway: a bare chain, one node per level.
      if (id + 1 < n && levels_[id + 1] == l) throw InvalidArgument("start runway must be a chain");
      continue;
    }
    if (l == 0) continue;
    int below = 0;
    int p = -1;
    for (int v : neighbors(id)) {
      if (levels_[v] == l - 1) {
        ++below;
        p = v;
      }
    }
    if (below != 1) {
      throw InvalidArgument("node " + std::to_string(id) + " must have exactly one parent");
    }
    if (l != prev_level) prev_parent = -1;
    if (p < prev_parent) throw InvalidArgument("nodes within a level must be ordered by parent");
    prev_parent = p;
    prev_level = l;
  }

  std::vector<int> at_n;
  for (int id = 0; id < n; ++id) {
    if (levels_[id] == n_levels_) at_n.push_back(id);
  }
  if (at_n != targets_) throw InvalidArgument("targets must be exactly the level-n nodes");
  if (end_runway_ > 0) {
    if (at_n.size() != 1) throw InvalidArgument("an end runway needs a unique level-n node");
    for (int l = n_levels_ + 1; l <= n_levels_ + end_runway_; ++l) {
      if (std::count(levels_.begin(), levels_.end(), l) != 1) {
        throw InvalidArgument("end runway must be a chain");
      }
    }
  }
  if (start_runway_ > 0 && levels_[0] != -start_runway_) {
    throw InvalidArgument("start runway levels must be contiguous");
  }
}

int DecisionTree::unique_target() const {
  if (targets_.size() != 1) {
    throw InvalidArgument("expected exactly one level-" + std::to_string(n_levels_) +
                          " node, found " + std::to_string(targets_.size()));
  }
  return targets_.front();
}

int DecisionTree::parent(int id) const {
  const int l = level(id);
  if (l <= 0) return -1;
  for (int v : neighbors(id)) {
    if (levels_[v] == l - 1) return v;
  }
  return -1;
}

std::vector<int> DecisionTree::children(int id) const {
  std::vector<int> out;
  const int l = level(id);
  if (l < 0) return out;
  for (int v : neighbors(id)) {
    if (levels_[v] == l + 1) out.push_back(v);
  }
  return out;
}

std::vector<int> DecisionTree::nodes_at_level(int l) const {
  auto lo = std::lower_bound(levels_.begin(), levels_.end(), l);
  auto hi = std::upper_bound(levels_.begin(), levels_.end(), l);
  std::vector<int> out(static_cast<std::size_t>(hi - lo));
  std::iota(out.begin(), out.end(), static_cast<int>(lo - levels_.begin()));
  return out;
}

bool DecisionTree::is_runway(int id) const {
  const int l = level(id);
  return l < 0 || l > n_levels_;
}

std::optional<Bitstring> DecisionTree::label(int id) const {
  if (labels_.empty() || labels_.at(id) < 0) return std::nullopt;
  return unpack_bits(static_cast<std::uint64_t>(labels_[id]), level(id));
}

std::vector<NodeRecord> DecisionTree::nodes() const {
  std::vector<NodeRecord> out;
  out.reserve(levels_.size());
  for (int id = 0; id < size(); ++id) out.push_back({id, levels_[id]});
  return out;
}

bool operator==(const DecisionTree& a, const DecisionTree& b) {
  return a.n_levels_ == b.n_levels_ && a.levels_ == b.levels_ && a.edges_ == b.edges_ &&
         a.root_ == b.root_ && a.targets_ == b.targets_;
}

// ---------------------------------------------------------------------------
// ConstraintFamily

ConstraintFamily::ConstraintFamily(int n, Predicate f)
    : n_(n), f_(std::move(f)), calls_(std::make_shared<std::atomic<long>>(0)) {
  if (!f_) throw InvalidArgument("constraint family needs a predicate");
}

bool ConstraintFamily::operator()(BitView prefix) const {
  calls_->fetch_add(1);
  return f_(prefix);
}

// ---------------------------------------------------------------------------
// Builders

namespace {

void check_depth(int n) {
  if (n < 1) throw InvalidArgument("tree depth n must be at least 1");
  if (n > kMaxTreeDepth) {
    throw CapacityError("tree depth " + std::to_string(n) + " exceeds the limit of " +
                        std::to_string(kMaxTreeDepth));
  }
}

// Rooted tree with ordered children; node 0 is the root.
struct OrderedTree {
  std::vector<std::vector<int>> children{{}};

  int add_child(int parent) {
    children.emplace_back();
    const int id = static_cast<int>(children.size()) - 1;
    children[parent].push_back(id);
    return id;
  }
};

// Level-major relabelling of an ordered tree, plus runways.
DecisionTree assemble(int n, const OrderedTree& ot, int start_len, int end_len) {
  std::vector<int> order{0};
  std::vector<int> depth(ot.children.size(), 0);
  std::vector<int> tree_parent(ot.children.size(), -1);
  for (std::size_t head = 0; head < order.size(); ++head) {
    const int u = order[head];
    for (int c : ot.children[u]) {
      depth[c] = depth[u] + 1;
      tree_parent[c] = u;
      order.push_back(c);
    }
  }
  std::vector<int> new_id(ot.children.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    new_id[order[i]] = start_len + static_cast<int>(i);
  }

  const int tree_nodes = static_cast<int>(order.size());
  std::vector<int> levels;
  std::vector<Edge> edges;
  levels.reserve(static_cast<std::size_t>(tree_nodes + start_len + end_len));
  for (int j = start_len; j >= 1; --j) levels.push_back(-j);
  for (int u : order) levels.push_back(depth[u]);
  const int root = start_len;
  for (int i = 0; i + 1 < start_len; ++i) edges.emplace_back(i, i + 1);
  if (start_len > 0) edges.emplace_back(start_len - 1, root);
  for (int u : order) {
    if (tree_parent[u] >= 0) edges.emplace_back(new_id[tree_parent[u]], new_id[u]);
  }
  std::vector<int> targets;
  for (int u : order) {
    if (depth[u] == n) targets.push_back(new_id[u]);
  }
  if (end_len > 0) {
    if (targets.size() != 1) throw InvalidArgument("an end runway needs a unique level-n node");
    int prev = targets.front();
    for (int j = 1; j <= end_len; ++j) {
      const int id = static_cast<int>(levels.size());
      levels.push_back(n + j);
      edges.emplace_back(prev, id);
      prev = id;
    }
  }
  return DecisionTree(n, std::move(levels), std::move(edges), root, std::move(targets));
}

}  // namespace

DecisionTree trim_tree(int n, const ConstraintFamily& f) {
  check_depth(n);
  std::vector<int> levels{0};
  std::vector<Edge> edges;
  std::vector<std::int64_t> labels{0};
  std::vector<int> frontier{0};
  Bitstring prefix;
  for (int i = 1; i <= n; ++i) {
    std::vector<int> next;
    next.reserve(frontier.size() * 2);
    for (int parent : frontier) {
      const auto base = static_cast<std::uint64_t>(labels[parent]) << 1;
      for (std::uint64_t b = 0; b < 2; ++b) {
        prefix = unpack_bits(base | b, i);
        if (!f(prefix)) continue;
        const int id = static_cast<int>(levels.size());
        levels.push_back(i);
        labels.push_back(static_cast<std::int64_t>(base | b));
        edges.emplace_back(parent, id);
        next.push_back(id);
      }
    }
    frontier = std::move(next);
  }
  std::vector<int> targets = frontier;
  return DecisionTree(n, std::move(levels), std::move(edges), 0, std::move(targets),
                      std::move(labels));
}

DecisionTree build_underlying_tree(int n) {
  return trim_tree(n, ConstraintFamily(n, [](BitView) { return true; }));
}

namespace {

void check_path(int n, BitView w) {
  if (static_cast<int>(w.size()) != n) {
    throw InvalidArgument("marked path must have exactly n = " + std::to_string(n) + " bits");
  }
}

}  // namespace

DecisionTree build_grover_tree(int n, BitView w) {
  if (n < 2) throw InvalidArgument("grover tree needs n >= 2");
  check_path(n, w);
  Bitstring marked(w.begin(), w.end());
  return trim_tree(n, ConstraintFamily(n, [marked, n](BitView x) {
                     if (static_cast<int>(x.size()) < n) return true;
                     return std::equal(x.begin(), x.end(), marked.begin());
                   }));
}

bool even_bush_allows(BitView prefix, BitView w) {
  for (std::size_t j = 0; j < prefix.size(); ++j) {
    if (prefix[j] != w[j]) return (j + 1) % 2 == 0;
  }
  return true;
}

DecisionTree build_even_bush_tree(int n, BitView w) {
  if (n < 2 || n % 2 != 0) throw InvalidArgument("even-bush tree needs an even n >= 2");
  check_path(n, w);
  Bitstring marked(w.begin(), w.end());
  return trim_tree(n, ConstraintFamily(n, [marked, n](BitView x) {
                     const int i = static_cast<int>(x.size());
                     if (i < n - 1) return true;
                     if (i == n - 1) return even_bush_allows(x, marked);
                     return std::equal(x.begin(), x.end(), marked.begin());
                   }));
}

DecisionTree attach_runways(const DecisionTree& t, int start_len, int end_len) {
  if (start_len < 0 || end_len < 0) throw InvalidArgument("runway lengths must be non-negative");
  if (start_len == 0 && end_len == 0) return t;
  if (t.start_runway_length() > 0 || t.end_runway_length() > 0) {
    throw InvalidArgument("tree already carries runways");
  }
  const int n = t.n_levels();
  int target = -1;
  if (end_len > 0) target = t.unique_target();

  std::vector<int> levels;
  std::vector<Edge> edges;
  std::vector<std::int64_t> labels;
  const bool labelled = t.has_labels();
  for (int j = start_len; j >= 1; --j) {
    levels.push_back(-j);
    if (labelled) labels.push_back(-1);
  }
  for (int id = 0; id < t.size(); ++id) {
    levels.push_back(t.level(id));
    if (labelled) {
      auto lab = t.label(id);
      labels.push_back(lab ? static_cast<std::int64_t>(pack_bits(*lab)) : -1);
    }
  }
  for (const auto& [a, b] : t.edges()) edges.emplace_back(a + start_len, b + start_len);
  for (int i = 0; i + 1 < start_len; ++i) edges.emplace_back(i, i + 1);
  const int root = t.root() + start_len;
  if (start_len > 0) edges.emplace_back(start_len - 1, root);
  int prev = target + start_len;
  for (int j = 1; j <= end_len; ++j) {
    const int id = static_cast<int>(levels.size());
    levels.push_back(n + j);
    if (labelled) labels.push_back(-1);
    edges.emplace_back(prev, id);
    prev = id;
  }
  std::vector<int> targets;
  for (int id : t.targets()) targets.push_back(id + start_len);
  return DecisionTree(n, std::move(levels), std::move(edges), root, std::move(targets),
                      std::move(labels));
}

int default_runway_length(double t_max) {
  return std::max(100, static_cast<int>(std::ceil(4.0 * t_max)));
}

// ---------------------------------------------------------------------------
// Bushes and the base/bush form

int ExplicitBush::height() const {
  auto h = heights();
  return h.empty() ? 0 : *std::max_element(h.begin(), h.end());
}

std::vector<int> ExplicitBush::heights() const {
  std::vector<int> h(parent.size(), 0);
  for (std::size_t i = 0; i < parent.size(); ++i) {
    const int p = parent[i];
    if (i == 0) {
      if (p != -1) throw InvalidArgument("explicit bush node 0 must attach to the base");
      h[i] = 1;
      continue;
    }
    if (p < 0 || p >= static_cast<int>(i)) {
      throw InvalidArgument("explicit bush parents must precede their children");
    }
    h[i] = h[p] + 1;
  }
  return h;
}

ExplicitBush ExplicitBush::perfect(int height) {
  ExplicitBush b;
  if (height <= 0) return b;
  b.parent.push_back(-1);
  std::size_t level_begin = 0;
  for (int l = 2; l <= height; ++l) {
    const std::size_t level_end = b.parent.size();
    for (std::size_t p = level_begin; p < level_end; ++p) {
      b.parent.push_back(static_cast<int>(p));
      b.parent.push_back(static_cast<int>(p));
    }
    level_begin = level_end;
  }
  return b;
}

int bush_height(const BushSpec& spec) {
  if (const auto* p = std::get_if<PerfectBush>(&spec)) return p->height;
  if (const auto* e = std::get_if<ExplicitBush>(&spec)) return e->height();
  return 0;
}

int bush_size(const BushSpec& spec) {
  if (const auto* p = std::get_if<PerfectBush>(&spec)) {
    return p->height <= 0 ? 0 : (1 << p->height) - 1;
  }
  if (const auto* e = std::get_if<ExplicitBush>(&spec)) return e->size();
  return 0;
}

int BaseBushForm::total_nodes() const {
  int total = base_length + 1 + start_runway + end_runway;
  for (const auto& b : bushes) total += bush_size(b);
  return total;
}

namespace {

void validate_form(const BaseBushForm& b) {
  if (b.base_length < 1) throw InvalidArgument("base length must be at least 1");
  if (static_cast<int>(b.bushes.size()) != b.base_length - 1) {
    throw InvalidArgument("need one bush spec for each base position 0..n-2");
  }
  if (!b.base_bits.empty() && static_cast<int>(b.base_bits.size()) != b.base_length) {
    throw InvalidArgument("base_bits must be empty or have n entries");
  }
  if (b.start_runway < 0 || b.end_runway < 0) throw InvalidArgument("negative runway length");
  for (const auto& spec : b.bushes) {
    if (const auto* p = std::get_if<PerfectBush>(&spec)) {
      if (p->height < 1) throw InvalidArgument("perfect bush height must be positive");
      if (p->height > kMaxTreeDepth) throw CapacityError("perfect bush too tall to materialize");
    }
    if (const auto* e = std::get_if<ExplicitBush>(&spec)) {
      if (e->parent.empty()) throw InvalidArgument("explicit bush must not be empty");
      e->heights();
    }
  }
}

}  // namespace

DecisionTree from_base_bush_form(const BaseBushForm& b) {
  validate_form(b);
  const long long limit = 1LL << (kMaxTreeDepth + 1);
  long long total = b.base_length + 1LL + b.start_runway + b.end_runway;
  for (const auto& spec : b.bushes) total += bush_size(spec);
  if (total > limit) throw CapacityError("base/bush form too large to materialize");

  OrderedTree ot;
  int base = 0;
  for (int j = 0; j < b.base_length; ++j) {
    const BushSpec* spec = j + 1 < b.base_length ? &b.bushes[j] : nullptr;
    const bool has_bush = spec && !std::holds_alternative<NoBush>(*spec);
    const bool bush_first = has_bush && !b.base_bits.empty() && b.base_bits[j] == 1;
    int bush_root = -1;
    if (has_bush && bush_first) bush_root = ot.add_child(base);
    const int next = ot.add_child(base);
    if (has_bush && !bush_first) bush_root = ot.add_child(base);
    if (has_bush) {
      const ExplicitBush shape = std::holds_alternative<PerfectBush>(*spec)
                                     ? ExplicitBush::perfect(std::get<PerfectBush>(*spec).height)
                                     : std::get<ExplicitBush>(*spec);
      std::vector<int> ids(shape.parent.size());
      ids[0] = bush_root;
      for (std::size_t i = 1; i < shape.parent.size(); ++i) {
        ids[i] = ot.add_child(ids[shape.parent[i]]);
      }
    }
    base = next;
  }
  return assemble(b.base_length, ot, b.start_runway, b.end_runway);
}

BaseBushForm to_base_bush_form(const DecisionTree& t) {
  const int n = t.n_levels();
  if (n < 1) throw InvalidArgument("base/bush form needs n >= 1");
  const int target = t.unique_target();
  std::vector<int> base(static_cast<std::size_t>(n) + 1);
  base[n] = target;
  for (int j = n; j > 0; --j) base[j - 1] = t.parent(base[j]);

  BaseBushForm form;
  form.base_length = n;
  form.start_runway = t.start_runway_length();
  form.end_runway = t.end_runway_length();
  form.base_bits.assign(static_cast<std::size_t>(n), 0);
  for (int j = 0; j < n; ++j) {
    std::vector<int> off_base;
    for (int c : t.children(base[j])) {
      if (c != base[j + 1]) off_base.push_back(c);
    }
    if (j == n - 1) {
      if (!off_base.empty()) throw InvalidArgument("base position n-1 cannot carry a bush");
      break;
    }
    if (off_base.size() > 1) {
      throw InvalidArgument("base position " + std::to_string(j) + " carries more than one bush");
    }
    if (off_base.empty()) {
      form.bushes.emplace_back(NoBush{});
      continue;
    }
    form.base_bits[j] = base[j + 1] > off_base.front() ? 1 : 0;

    ExplicitBush bush;
    std::vector<int> order{off_base.front()};
    bush.parent.push_back(-1);
    std::vector<int> counts{1};
    std::vector<int> height{1};
    for (std::size_t head = 0; head < order.size(); ++head) {
      for (int c : t.children(order[head])) {
        order.push_back(c);
        bush.parent.push_back(static_cast<int>(head));
        height.push_back(height[head] + 1);
        if (static_cast<int>(counts.size()) < height.back()) counts.push_back(0);
        ++counts[height.back() - 1];
      }
    }
    bool perfect = true;
    for (std::size_t l = 0; l < counts.size(); ++l) {
      if (counts[l] != (1 << l)) perfect = false;
    }
    if (perfect) {
      form.bushes.emplace_back(PerfectBush{static_cast<int>(counts.size())});
    } else {
      form.bushes.emplace_back(std::move(bush));
    }
  }
  return form;
}

BaseBushForm line_form(int n, int start_runway, int end_runway) {
  BaseBushForm b;
  b.base_length = n;
  b.bushes.assign(static_cast<std::size_t>(std::max(0, n - 1)), NoBush{});
  b.start_runway = start_runway;
  b.end_runway = end_runway;
  b.base_bits.assign(static_cast<std::size_t>(n), 0);
  return b;
}

BaseBushForm grover_form(int n, int start_runway, int end_runway) {
  if (n < 2) throw InvalidArgument("grover form needs n >= 2");
  BaseBushForm b = line_form(n, start_runway, end_runway);
  for (int m = 0; m <= n - 2; ++m) {
    b.bushes[m] = PerfectBush{n - 1 - m};
    b.base_bits[m] = 1;
  }
  return b;
}

BaseBushForm even_bush_form(int n, int start_runway, int end_runway) {
  if (n < 2 || n % 2 != 0) throw InvalidArgument("even-bush form needs an even n >= 2");
  BaseBushForm b = line_form(n, start_runway, end_runway);
  for (int m = 0; m <= n - 2; ++m) {
    int k = n - 1 - m;
    if (k % 2 == 1) --k;
    if (k > 0) {
      b.bushes[m] = PerfectBush{k};
      b.base_bits[m] = 1;
    }
  }
  return b;
}

}  // namespace qwalk
