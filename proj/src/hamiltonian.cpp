#include "qwalk/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qwalk/error.hpp"

namespace qwalk {

GraphHamiltonian::GraphHamiltonian(int dim, double gamma, std::vector<double> diag,
                                   std::vector<OffDiagonal> upper)
    : dim_(dim), gamma_(gamma), diag_(std::move(diag)), upper_(std::move(upper)) {
  if (dim_ <= 0) throw InvalidArgument("Hamiltonian dimension must be positive");
  if (!(gamma_ > 0.0)) throw InvalidArgument("gamma must be positive");
  if (static_cast<int>(diag_.size()) != dim_) throw InvalidArgument("diagonal has wrong length");
  for (auto& e : upper_) {
    if (e.row > e.col) std::swap(e.row, e.col);
    if (e.row < 0 || e.col >= dim_ || e.row == e.col) {
      throw InvalidArgument("off-diagonal entry out of range");
    }
  }
  std::sort(upper_.begin(), upper_.end(), [](const OffDiagonal& a, const OffDiagonal& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  for (std::size_t i = 1; i < upper_.size(); ++i) {
    if (upper_[i].row == upper_[i - 1].row && upper_[i].col == upper_[i - 1].col) {
      throw InvalidArgument("duplicate off-diagonal entry");
    }
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(diag_.size() + 2 * upper_.size());
  std::vector<double> radius(static_cast<std::size_t>(dim_), 0.0);
  for (int i = 0; i < dim_; ++i) trip.emplace_back(i, i, diag_[i]);
  for (const auto& e : upper_) {
    trip.emplace_back(e.row, e.col, e.value);
    trip.emplace_back(e.col, e.row, e.value);
    radius[e.row] += std::abs(e.value);
    radius[e.col] += std::abs(e.value);
  }
  sparse_.resize(dim_, dim_);
  sparse_.setFromTriplets(trip.begin(), trip.end());
  sparse_.makeCompressed();

  gersh_lo_ = diag_[0] - radius[0];
  gersh_hi_ = diag_[0] + radius[0];
  for (int i = 1; i < dim_; ++i) {
    gersh_lo_ = std::min(gersh_lo_, diag_[i] - radius[i]);
    gersh_hi_ = std::max(gersh_hi_, diag_[i] + radius[i]);
  }
}

double GraphHamiltonian::entry(int i, int j) const {
  if (i < 0 || j < 0 || i >= dim_ || j >= dim_) throw InvalidArgument("index out of range");
  if (i == j) return diag_[i];
  if (i > j) std::swap(i, j);
  auto it = std::lower_bound(upper_.begin(), upper_.end(), std::make_pair(i, j),
                             [](const OffDiagonal& e, const std::pair<int, int>& key) {
                               return e.row != key.first ? e.row < key.first : e.col < key.second;
                             });
  if (it != upper_.end() && it->row == i && it->col == j) return it->value;
  return 0.0;
}

void GraphHamiltonian::apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
  out.resize(dim_);
  for (int r = 0; r < dim_; ++r) {
    cplx acc = 0.0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(sparse_, r); it; ++it) {
      acc += it.value() * in[it.col()];
    }
    out[r] = acc;
  }
}

Eigen::MatrixXd GraphHamiltonian::dense() const {
  if (dim_ > kDenseLimit) {
    throw CapacityError("dense Hamiltonian of dimension " + std::to_string(dim_) +
                        " exceeds the limit of " + std::to_string(kDenseLimit));
  }
  return Eigen::MatrixXd(sparse_);
}

std::string GraphHamiltonian::to_coordinate_text() const {
  std::ostringstream os;
  os.precision(17);
  for (int r = 0; r < dim_; ++r) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(sparse_, r); it; ++it) {
      os << r << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
  return os.str();
}

GraphHamiltonian hamiltonian_from_tree(const DecisionTree& t, double gamma, RunwayWeights rw) {
  if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  const int n = t.size();
  std::vector<double> diag(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    const bool interior = t.is_runway(a) && t.degree(a) == 2;
    diag[a] = interior ? rw.diagonal * gamma : gamma * t.degree(a);
  }
  std::vector<OffDiagonal> upper;
  upper.reserve(t.edges().size());
  for (const auto& [a, b] : t.edges()) {
    const bool runway_edge = t.is_runway(a) && t.is_runway(b);
    upper.push_back({a, b, runway_edge ? rw.neighbor * gamma : -gamma});
  }
  return GraphHamiltonian(n, gamma, std::move(diag), std::move(upper));
}

double zero_mode_check(const GraphHamiltonian& h) {
  Eigen::VectorXd u = Eigen::VectorXd::Constant(h.dim(), 1.0 / std::sqrt(double(h.dim())));
  Eigen::VectorXd hu;
  h.apply(u, hu);
  return hu.lpNorm<Eigen::Infinity>();
}

Spectrum spectrum(const GraphHamiltonian& h, bool with_vectors) {
  Eigen::MatrixXd m = h.dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      m, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ContractError("eigensolver failed to converge");
  Spectrum s;
  s.values = es.eigenvalues();
  if (with_vectors) {
    s.vectors = es.eigenvectors();
    const double norm = std::max(m.norm(), 1e-300);
    s.residual = (m * s.vectors - s.vectors * s.values.asDiagonal()).norm() / norm;
  }
  return s;
}

EffectiveChain reduce_perfect_bushes(const BaseBushForm& b, double gamma, RunwayWeights rw) {
  if (b.base_length < 1) throw InvalidArgument("base length must be at least 1");
  if (static_cast<int>(b.bushes.size()) != b.base_length - 1) {
    throw InvalidArgument("need one bush spec for each base position 0..n-2");
  }
  for (const auto& spec : b.bushes) {
    if (std::holds_alternative<ExplicitBush>(spec)) {
      throw InvalidArgument("reduction supports perfect bushes only");
    }
  }
  const int n = b.base_length;
  const int ls = b.start_runway;
  const int le = b.end_runway;

  std::vector<ChainSite> origin;
  std::vector<double> diag;
  std::vector<OffDiagonal> upper;
  // Line sites: start runway, base 0..n, end runway.
  const int line = ls + n + 1 + le;
  for (int s = 0; s < line; ++s) {
    const int pos = s - ls;
    origin.push_back({pos, 0});
    const bool runway = pos < 0 || pos > n;
    const int line_degree = (s > 0 ? 1 : 0) + (s + 1 < line ? 1 : 0);
    int degree = line_degree;
    if (pos >= 0 && pos <= n - 2 && bush_height(b.bushes[pos]) > 0) ++degree;
    const bool interior = runway && line_degree == 2;
    diag.push_back(interior ? rw.diagonal * gamma : gamma * degree);
    if (s + 1 < line) {
      const bool runway_edge = runway && (pos + 1 < 0 || pos + 1 > n);
      upper.push_back({s, s + 1, runway_edge ? rw.neighbor * gamma : -gamma});
    }
  }
  const double root2 = std::sqrt(2.0);
  for (int m = 0; m + 1 < n; ++m) {
    const int k = bush_height(b.bushes[m]);
    int prev = ls + m;
    for (int l = 1; l <= k; ++l) {
      const int s = static_cast<int>(diag.size());
      origin.push_back({m, l});
      diag.push_back(l < k ? 3.0 * gamma : gamma);
      upper.push_back({prev, s, l == 1 ? -gamma : -root2 * gamma});
      prev = s;
    }
  }
  const int dim = static_cast<int>(diag.size());
  return EffectiveChain{GraphHamiltonian(dim, gamma, std::move(diag), std::move(upper)),
                        std::move(origin), ls, n, le};
}

}  // namespace qwalk
