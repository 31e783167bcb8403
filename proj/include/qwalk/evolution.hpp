#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "qwalk/hamiltonian.hpp"

namespace qwalk {

struct ProbabilityVector {
  Eigen::VectorXd values;
  double time = 0.0;
  double error_bound = 0.0;

  double total() const { return values.sum(); }
};

struct StateVector {
  Eigen::VectorXcd amplitudes;
  double time = 0.0;
  // Accumulated bound on the propagation error in 2-norm.
  double error_bound = 0.0;

  static StateVector basis(int dim, int node);
  double norm() const { return amplitudes.norm(); }
};

// exp(-Ht) and exp(-iHt) for one Hamiltonian. Below kDenseDim the
// eigendecomposition is computed once and reused; above, quantum steps use a
// Chebyshev expansion with an explicit tail bound and classical steps use
// uniformization.
class Propagator {
 public:
  explicit Propagator(GraphHamiltonian h, double tolerance = 1e-12);

  static constexpr int kDenseDim = 2000;

  const GraphHamiltonian& hamiltonian() const { return h_; }
  bool is_dense() const { return static_cast<bool>(eig_); }

  ProbabilityVector classical(int start, double t) const;
  ProbabilityVector classical(const Eigen::VectorXd& p0, double t) const;
  StateVector quantum(const StateVector& psi0, double t) const;

  // Dense mode only: eigenvalues and orthonormal eigenvectors (columns).
  const Eigen::VectorXd& eigenvalues() const;
  const Eigen::MatrixXd& eigenvectors() const;

 private:
  struct Eigen_;
  GraphHamiltonian h_;
  double tol_;
  std::shared_ptr<const Eigen_> eig_;
};

// Chebyshev expansion of exp(-iHt) psi. Returns the truncation bound through
// `error_bound`.
Eigen::VectorXcd chebyshev_expm(const GraphHamiltonian& h, const Eigen::VectorXcd& psi, double t,
                                double tolerance, double* error_bound = nullptr);

ProbabilityVector classical_propagate(const GraphHamiltonian& h, int start, double t);
StateVector quantum_propagate(const GraphHamiltonian& h, const StateVector& psi0, double t);

enum class WalkMode { Classical, Quantum };

struct PenetrabilityReport {
  int n = 0;
  std::vector<double> t_grid;
  std::vector<double> prob_target;
  // |total probability - 1| at each sample.
  std::vector<double> norm_residual;
  double max_prob = 0.0;
  double argmax_t = 0.0;
};

// Samples the probability of being at level n or beyond (the target and any
// end runway) on t = 0, dt, ..., t_max. The walk starts at the root unless a
// quantum initial state is given.
PenetrabilityReport penetrability_probe(const DecisionTree& t, const GraphHamiltonian& h,
                                        WalkMode mode, double t_max, double dt = 0.1,
                                        const std::optional<StateVector>& psi0 = std::nullopt);

struct CauchyCheck {
  double integral = 0.0;        // (1/pi) Re of the truncated integral
  double zero_mode_term = 0.0;  // analytic remainder of the E = 0 component
  double classical = 0.0;       // p_ba(t)
  double discrepancy = 0.0;
};

// Compares p_ba(t) with (1/pi) Re \int_0^{T_cut} A_ba(t') / (t - i t') dt'
// plus the missing part of the zero-mode contribution. Throws ContractError
// when two quadrature orders disagree.
CauchyCheck cauchy_relation_check(const GraphHamiltonian& h, int a, int b, double t,
                                  double t_cut);

}  // namespace qwalk
