#include "qwalk/spin.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include <Eigen/Eigenvalues>

#include "qwalk/error.hpp"

namespace qwalk {

std::uint64_t SpinLayout::node_index(BitView label) const {
  const int i = static_cast<int>(label.size());
  if (i > n) throw InvalidArgument("label longer than the layout");
  std::uint64_t idx = std::uint64_t{1} << y(i);
  for (int k = 1; k <= i; ++k) {
    if (label[k - 1]) idx |= std::uint64_t{1} << x(k);
  }
  return idx;
}

namespace {

// A basis state of a term's support, addressed by global bit position.
class LocalState {
 public:
  LocalState(const std::vector<int>& support, std::uint64_t value)
      : support_(&support), value_(value) {}

  int get(int global) const { return static_cast<int>((value_ >> pos(global)) & 1u); }
  void set(int global, int bit) {
    const std::uint64_t mask = std::uint64_t{1} << pos(global);
    value_ = bit ? (value_ | mask) : (value_ & ~mask);
  }
  std::uint64_t value() const { return value_; }

 private:
  int pos(int global) const {
    auto it = std::lower_bound(support_->begin(), support_->end(), global);
    return static_cast<int>(it - support_->begin());
  }
  const std::vector<int>* support_;
  std::uint64_t value_;
};

// act(in, out) returns the coefficient <out|H|in> and fills `out`; terms here
// send each basis state to at most one basis state.
template <class Act>
LocalTerm build_term(std::vector<int> support, std::string name, int level, bool diagonal,
                     Act&& act) {
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  const int dim = 1 << support.size();
  LocalTerm term;
  term.block = Eigen::MatrixXd::Zero(dim, dim);
  for (int in = 0; in < dim; ++in) {
    LocalState s(support, static_cast<std::uint64_t>(in));
    LocalState out = s;
    const double v = act(s, out);
    if (v != 0.0) term.block(static_cast<int>(out.value()), in) += v;
  }
  term.support = std::move(support);
  term.name = std::move(name);
  term.level = level;
  term.diagonal = diagonal;
  return term;
}

LocalTerm y_term(const SpinLayout& L, int i, double coeff) {
  return build_term({L.y(i)}, "y" + std::to_string(i), i, true,
                    [&](const LocalState& s, LocalState&) { return coeff * s.get(L.y(i)); });
}

// -(rho_i^dag rho_{i+1} [sigma_{i+1}] + h.c.) times a diagonal factor c(x).
template <class Factor>
LocalTerm hop_term(const SpinLayout& L, int i, int branch, std::vector<int> extra,
                   Factor&& factor) {
  std::vector<int> support{L.y(i), L.y(i + 1), L.x(i + 1)};
  support.insert(support.end(), extra.begin(), extra.end());
  const std::string name = "hop" + std::to_string(branch) + "_" + std::to_string(i);
  return build_term(std::move(support), name, i, false,
                    [&](const LocalState& s, LocalState& out) -> double {
                      const int yi = s.get(L.y(i));
                      const int yj = s.get(L.y(i + 1));
                      const int xj = s.get(L.x(i + 1));
                      if (yi == 1 && yj == 0 && xj == 0) {
                        out.set(L.y(i), 0);
                        out.set(L.y(i + 1), 1);
                        out.set(L.x(i + 1), branch);
                      } else if (yi == 0 && yj == 1 && xj == branch) {
                        out.set(L.y(i), 1);
                        out.set(L.y(i + 1), 0);
                        out.set(L.x(i + 1), 0);
                      } else {
                        return 0.0;
                      }
                      return -factor(s);
                    });
}

void check_spin_size(int n) {
  if (n < 1) throw InvalidArgument("spin encoding needs n >= 1");
  if (n > kMaxSpinLevels) {
    throw CapacityError("spin encoding is limited to n <= " + std::to_string(kMaxSpinLevels));
  }
}

}  // namespace

std::vector<LocalTerm> assemble_tree_terms(int n) {
  check_spin_size(n);
  const SpinLayout L{n};
  std::vector<LocalTerm> terms;
  terms.push_back(y_term(L, 0, 2.0));
  for (int i = 1; i < n; ++i) terms.push_back(y_term(L, i, 3.0));
  terms.push_back(y_term(L, n, 1.0));
  const auto one = [](const LocalState&) { return 1.0; };
  for (int i = 0; i < n; ++i) {
    terms.push_back(hop_term(L, i, 0, {}, one));
    terms.push_back(hop_term(L, i, 1, {}, one));
  }
  return terms;
}

std::vector<LocalTerm> assemble_trimmed_terms(const ExactCoverInstance& inst, int n) {
  check_spin_size(n);
  if (n > inst.n()) throw InvalidArgument("n exceeds the instance's column count");
  if (!inst.restricted()) {
    throw ContractError("trimmed terms need a restricted instance");
  }
  const SpinLayout L{n};

  // Prefix bits C0_i / C1_i read: earlier columns of the rows containing i+1.
  auto constraint_support = [&](int i) {
    std::vector<int> cols;
    for (int row : inst.rows_with(i)) {
      for (int c : inst.rows()[row]) {
        if (c < i) cols.push_back(c + 1);
      }
    }
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    return cols;
  };

  std::vector<LocalTerm> terms;
  terms.push_back(y_term(L, 0, 2.0));
  std::vector<std::vector<int>> supports(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto cols = constraint_support(i);
    for (int k : cols) supports[i].push_back(L.x(k));
    if (supports[i].size() + 3 > static_cast<std::size_t>(kMaxTermSupport)) {
      std::ostringstream os;
      os << "hop terms at level " << i << " would act on " << supports[i].size() + 3
         << " bits; rows through column " << i + 1 << ":";
      for (int row : inst.rows_with(i)) os << ' ' << row;
      throw ContractError(os.str());
    }
  }
  auto read_prefix = [&](const LocalState& s, int i) {
    Bitstring prefix(static_cast<std::size_t>(i), 0);
    for (int k : constraint_support(i)) prefix[k - 1] = static_cast<std::uint8_t>(s.get(L.x(k)));
    return prefix;
  };
  for (int i = 1; i < n; ++i) {
    std::vector<int> support{L.y(i)};
    support.insert(support.end(), supports[i].begin(), supports[i].end());
    terms.push_back(build_term(std::move(support), "y" + std::to_string(i), i, true,
                               [&](const LocalState& s, LocalState&) -> double {
                                 if (!s.get(L.y(i))) return 0.0;
                                 const Bitstring p = read_prefix(s, i);
                                 return 1.0 + constraint_c0(inst, p) + constraint_c1(inst, p);
                               }));
  }
  terms.push_back(y_term(L, n, 1.0));
  for (int i = 0; i < n; ++i) {
    terms.push_back(hop_term(L, i, 0, supports[i], [&](const LocalState& s) {
      return constraint_c0(inst, read_prefix(s, i)) ? 1.0 : 0.0;
    }));
    terms.push_back(hop_term(L, i, 1, supports[i], [&](const LocalState& s) {
      return constraint_c1(inst, read_prefix(s, i)) ? 1.0 : 0.0;
    }));
  }
  return terms;
}

namespace {

// Global basis offsets of every local index of a support.
std::vector<std::uint64_t> deposit_table(const std::vector<int>& support) {
  const std::size_t dim = std::size_t{1} << support.size();
  std::vector<std::uint64_t> table(dim, 0);
  for (std::size_t l = 0; l < dim; ++l) {
    for (std::size_t b = 0; b < support.size(); ++b) {
      if ((l >> b) & 1u) table[l] |= std::uint64_t{1} << support[b];
    }
  }
  return table;
}

std::uint64_t support_mask(const std::vector<int>& support) {
  std::uint64_t m = 0;
  for (int g : support) m |= std::uint64_t{1} << g;
  return m;
}

std::uint64_t extract_local(std::uint64_t index, const std::vector<int>& support) {
  std::uint64_t l = 0;
  for (std::size_t b = 0; b < support.size(); ++b) {
    l |= ((index >> support[b]) & 1u) << b;
  }
  return l;
}

}  // namespace

GraphHamiltonian terms_hamiltonian(const std::vector<LocalTerm>& terms, int bits) {
  if (bits < 1 || bits > 20) throw CapacityError("term Hamiltonian limited to 20 bits");
  const std::uint64_t dim = std::uint64_t{1} << bits;
  std::vector<double> diag(dim, 0.0);
  std::unordered_map<std::uint64_t, double> upper;
  for (const auto& term : terms) {
    const auto table = deposit_table(term.support);
    const std::uint64_t mask = support_mask(term.support);
    const int ldim = static_cast<int>(table.size());
    for (std::uint64_t base = 0; base < dim; ++base) {
      if (base & mask) continue;
      for (int in = 0; in < ldim; ++in) {
        for (int out = 0; out < ldim; ++out) {
          const double v = term.block(out, in);
          if (v == 0.0) continue;
          const std::uint64_t a = base | table[in];
          const std::uint64_t b = base | table[out];
          if (a == b) {
            diag[a] += v;
          } else if (b < a) {
            upper[(b << 32) | a] += v;
          }
        }
      }
    }
  }
  std::vector<OffDiagonal> entries;
  entries.reserve(upper.size());
  for (const auto& [key, v] : upper) {
    if (v != 0.0) {
      entries.push_back({static_cast<int>(key >> 32), static_cast<int>(key & 0xffffffffu), v});
    }
  }
  return GraphHamiltonian(static_cast<int>(dim), 1.0, std::move(diag), std::move(entries));
}

std::vector<std::uint64_t> tree_basis_indices(const SpinLayout& layout, const DecisionTree& t) {
  if (!t.has_labels()) throw InvalidArgument("tree carries no node labels");
  if (t.n_levels() != layout.n) throw InvalidArgument("tree depth does not match the layout");
  std::vector<std::uint64_t> out;
  out.reserve(t.size());
  for (int id = 0; id < t.size(); ++id) {
    const auto label = t.label(id);
    if (!label) throw InvalidArgument("tree node " + std::to_string(id) + " has no label");
    out.push_back(layout.node_index(*label));
  }
  return out;
}

Eigen::MatrixXd project_to_tree(const std::vector<LocalTerm>& terms, const SpinLayout& layout,
                                const DecisionTree& t) {
  const auto index = tree_basis_indices(layout, t);
  std::unordered_map<std::uint64_t, int> node_of;
  for (int id = 0; id < t.size(); ++id) node_of[index[id]] = id;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(t.size(), t.size());
  for (const auto& term : terms) {
    const auto table = deposit_table(term.support);
    const std::uint64_t mask = support_mask(term.support);
    for (int a = 0; a < t.size(); ++a) {
      const std::uint64_t in = extract_local(index[a], term.support);
      const std::uint64_t base = index[a] & ~mask;
      for (int lo = 0; lo < term.block.rows(); ++lo) {
        const double v = term.block(lo, static_cast<int>(in));
        if (v == 0.0) continue;
        auto it = node_of.find(base | table[lo]);
        if (it != node_of.end()) out(it->second, a) += v;
      }
    }
  }
  return out;
}

TrotterPlan make_trotter_plan(const std::vector<LocalTerm>& terms, double t, int m) {
  if (m < 1) throw InvalidArgument("Trotter plan needs m >= 1");
  TrotterPlan plan{t, m, {}};
  plan.order.resize(terms.size());
  for (std::size_t k = 0; k < terms.size(); ++k) plan.order[k] = static_cast<int>(k);
  std::stable_sort(plan.order.begin(), plan.order.end(), [&](int a, int b) {
    if (terms[a].diagonal != terms[b].diagonal) return terms[a].diagonal;
    if (terms[a].diagonal) return false;
    return terms[a].level < terms[b].level;
  });
  return plan;
}

Eigen::VectorXcd trotter_evolve(const std::vector<LocalTerm>& terms, int bits,
                                const Eigen::VectorXcd& psi0, const TrotterPlan& plan) {
  if (bits < 1 || bits > kMaxTrotterBits) {
    throw CapacityError("Trotter evolution is limited to " + std::to_string(kMaxTrotterBits) +
                        " bits");
  }
  const std::uint64_t dim = std::uint64_t{1} << bits;
  if (static_cast<std::uint64_t>(psi0.size()) != dim) {
    throw InvalidArgument("state has the wrong dimension for the bit count");
  }
  if (plan.m < 1) throw InvalidArgument("Trotter plan needs m >= 1");
  const double tau = plan.t / plan.m;

  struct Step {
    Eigen::MatrixXcd u;
    std::vector<std::uint64_t> table;
    std::uint64_t mask;
  };
  std::vector<Step> steps;
  // The rightmost factor of a slice acts first.
  for (auto it = plan.order.rbegin(); it != plan.order.rend(); ++it) {
    const LocalTerm& term = terms.at(*it);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(term.block);
    Eigen::VectorXcd phase(es.eigenvalues().size());
    for (int k = 0; k < phase.size(); ++k) phase[k] = std::polar(1.0, -es.eigenvalues()[k] * tau);
    const Eigen::MatrixXcd v = es.eigenvectors().cast<cplx>();
    steps.push_back({v * phase.asDiagonal() * v.adjoint(), deposit_table(term.support),
                     support_mask(term.support)});
  }

  Eigen::VectorXcd psi = psi0;
  for (int slice = 0; slice < plan.m; ++slice) {
    for (const auto& step : steps) {
      const int ldim = static_cast<int>(step.table.size());
      Eigen::VectorXcd local(ldim);
      for (std::uint64_t base = 0; base < dim; ++base) {
        if (base & step.mask) continue;
        for (int l = 0; l < ldim; ++l) local[l] = psi[base | step.table[l]];
        const Eigen::VectorXcd moved = step.u * local;
        for (int l = 0; l < ldim; ++l) psi[base | step.table[l]] = moved[l];
      }
    }
  }
  return psi;
}

std::string dump_terms(const std::vector<LocalTerm>& terms) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& term : terms) {
    os << term.name << " support";
    for (int g : term.support) os << ' ' << g;
    os << " block";
    for (int r = 0; r < term.block.rows(); ++r) {
      for (int c = 0; c < term.block.cols(); ++c) os << ' ' << term.block(r, c);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace qwalk
