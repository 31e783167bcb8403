#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "qwalk/tree.hpp"

namespace qwalk {

using cplx = std::complex<double>;

// Weights used on runway sites, in units of gamma. Only sites strictly inside
// a runway and edges joining two runway sites are affected; the junction with
// the tree and the outermost site keep the degree-based values.
struct RunwayWeights {
  double diagonal = 2.0;
  double neighbor = -1.0;

  static RunwayWeights standard() { return {}; }
  // Continuum band [0, 6].
  static RunwayWeights alternative() { return {3.0, -1.5}; }
  bool is_standard() const { return diagonal == 2.0 && neighbor == -1.0; }
};

struct OffDiagonal {
  int row;
  int col;
  double value;
};

// Real symmetric matrix stored as a diagonal plus the strict upper triangle.
class GraphHamiltonian {
 public:
  GraphHamiltonian(int dim, double gamma, std::vector<double> diag,
                   std::vector<OffDiagonal> upper);

  int dim() const { return dim_; }
  double gamma() const { return gamma_; }
  const std::vector<double>& diag() const { return diag_; }
  // Entries with row < col, sorted.
  const std::vector<OffDiagonal>& offdiag() const { return upper_; }
  double entry(int i, int j) const;

  const Eigen::SparseMatrix<double, Eigen::RowMajor>& sparse() const { return sparse_; }
  void apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const { out = sparse_ * in; }
  void apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;

  // Throws CapacityError above kDenseLimit.
  Eigen::MatrixXd dense() const;

  // Union of the Gershgorin discs.
  double gershgorin_lower() const { return gersh_lo_; }
  double gershgorin_upper() const { return gersh_hi_; }

  // "row col value" lines, both triangles, for debugging.
  std::string to_coordinate_text() const;

  static constexpr int kDenseLimit = 10000;

 private:
  int dim_;
  double gamma_;
  std::vector<double> diag_;
  std::vector<OffDiagonal> upper_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> sparse_;
  double gersh_lo_ = 0.0;
  double gersh_hi_ = 0.0;
};

GraphHamiltonian hamiltonian_from_tree(const DecisionTree& t, double gamma = 1.0,
                                       RunwayWeights rw = RunwayWeights::standard());

// ||H u||_inf for u the uniform unit vector.
double zero_mode_check(const GraphHamiltonian& h);

struct Spectrum {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns, empty unless requested
  double residual = 0.0;    // ||HV - V diag(values)|| / ||H||, when vectors requested
};

Spectrum spectrum(const GraphHamiltonian& h, bool with_vectors = false);

// A perfect-bush tree projected onto its level-symmetric subspace: the base
// line with runways plus one side chain per bush.
struct ChainSite {
  int base_pos;  // base position, or the runway level for runway sites
  int height;    // 0 on the base and runways, 1..k inside a bush
};

struct EffectiveChain {
  GraphHamiltonian h;
  std::vector<ChainSite> origin;
  int start_runway = 0;
  int base_length = 0;
  int end_runway = 0;

  // Site index of base position j (j may be a runway level).
  int base_site(int j) const { return start_runway + j; }
  // Sites on the end runway, levels n+1..n+L.
  int end_runway_begin() const { return start_runway + base_length + 1; }
};

// Throws InvalidArgument when an ExplicitBush is present.
EffectiveChain reduce_perfect_bushes(const BaseBushForm& b, double gamma = 1.0,
                                     RunwayWeights rw = RunwayWeights::standard());

}  // namespace qwalk
