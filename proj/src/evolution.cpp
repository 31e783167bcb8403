#include "qwalk/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "qwalk/bessel.hpp"
#include "qwalk/error.hpp"

namespace qwalk {

StateVector StateVector::basis(int dim, int node) {
  if (node < 0 || node >= dim) throw InvalidArgument("basis node out of range");
  StateVector s;
  s.amplitudes = Eigen::VectorXcd::Zero(dim);
  s.amplitudes[node] = 1.0;
  return s;
}

struct Propagator::Eigen_ {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

Propagator::Propagator(GraphHamiltonian h, double tolerance) : h_(std::move(h)), tol_(tolerance) {
  if (h_.dim() < kDenseDim) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h_.dense());
    if (es.info() != Eigen::Success) throw ContractError("eigensolver failed to converge");
    eig_ = std::make_shared<const Eigen_>(Eigen_{es.eigenvalues(), es.eigenvectors()});
  }
}

const Eigen::VectorXd& Propagator::eigenvalues() const {
  if (!eig_) throw ContractError("no eigendecomposition above the dense limit");
  return eig_->values;
}

const Eigen::MatrixXd& Propagator::eigenvectors() const {
  if (!eig_) throw ContractError("no eigendecomposition above the dense limit");
  return eig_->vectors;
}

namespace {

void check_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("time must be finite and >= 0");
}

// Uniformization: exp(-Ht) p = sum_k Poisson(k; L t) (I - H/L)^k p.
Eigen::VectorXd uniformized(const GraphHamiltonian& h, const Eigen::VectorXd& p0, double t,
                            double tol, double* error_bound) {
  double lambda = 0.0;
  for (double d : h.diag()) lambda = std::max(lambda, d);
  for (const auto& e : h.offdiag()) {
    if (e.value > 0.0) throw ContractError("uniformization needs non-positive off-diagonals");
  }
  Eigen::VectorXd colsum = Eigen::VectorXd::Ones(h.dim()).transpose() * h.sparse();
  if (colsum.lpNorm<Eigen::Infinity>() > 1e-12 * std::max(1.0, lambda)) {
    throw ContractError("uniformization needs a generator with vanishing column sums");
  }
  if (t == 0.0 || lambda == 0.0) {
    if (error_bound) *error_bound = 0.0;
    return p0;
  }
  const double lt = lambda * t;
  Eigen::VectorXd term = p0;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(p0.size());
  Eigen::VectorXd next;
  double mass = 0.0;
  for (long k = 0;; ++k) {
    const double w = std::exp(-lt + k * std::log(lt) - std::lgamma(k + 1.0));
    out += w * term;
    mass += w;
    if (k > lt && 1.0 - mass < tol) break;
    if (k > 10 * lt + 1000) break;
    h.apply(term, next);
    term -= next / lambda;
  }
  if (error_bound) *error_bound = std::max(0.0, 1.0 - mass);
  return out;
}

double log_factorial(double k) { return std::lgamma(k + 1.0); }

}  // namespace

Eigen::VectorXcd chebyshev_expm(const GraphHamiltonian& h, const Eigen::VectorXcd& psi, double t,
                                double tolerance, double* error_bound) {
  const double lo = h.gershgorin_lower();
  const double hi = h.gershgorin_upper();
  const double c = 0.5 * (hi + lo);
  const double r = std::max(0.5 * (hi - lo), 1e-12);
  const double x = r * std::abs(t);

  // Smallest K past the turning point whose tail bound
  // 2 (x/2)^{K+1} / (K+1)! / (1 - x / (2(K+2))) meets the tolerance.
  int order = static_cast<int>(std::ceil(x));
  double tail = 0.0;
  for (;; ++order) {
    if (order + 2 <= x / 2.0) continue;
    const double log_tail = std::log(2.0) + (order + 1) * std::log(std::max(x / 2.0, 1e-300)) -
                            log_factorial(order + 1.0) -
                            std::log(1.0 - x / (2.0 * (order + 2)));
    tail = std::exp(log_tail);
    if (tail <= tolerance || x == 0.0) break;
  }
  const std::vector<double> jk = bessel_j_all(order, x);
  const double sgn = t < 0.0 ? -1.0 : 1.0;
  static const cplx minus_i_pow[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};

  auto apply_x = [&](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
    h.apply(in, out);
    out = (out - c * in) / r;
  };
  Eigen::VectorXcd prev = psi;
  Eigen::VectorXcd cur;
  apply_x(prev, cur);
  Eigen::VectorXcd acc = jk[0] * prev;
  if (order >= 1) acc += 2.0 * minus_i_pow[1] * sgn * jk[1] * cur;
  Eigen::VectorXcd next;
  double sgn_k = sgn;
  for (int k = 2; k <= order; ++k) {
    apply_x(cur, next);
    next = 2.0 * next - prev;
    sgn_k *= sgn;
    acc += 2.0 * minus_i_pow[k % 4] * sgn_k * jk[k] * next;
    prev.swap(cur);
    cur.swap(next);
  }
  acc *= std::polar(1.0, -c * t);
  if (error_bound) *error_bound = (tail + 4e-16 * (order + 1)) * psi.norm();
  return acc;
}

ProbabilityVector Propagator::classical(int start, double t) const {
  if (start < 0 || start >= h_.dim()) throw InvalidArgument("start node out of range");
  Eigen::VectorXd p0 = Eigen::VectorXd::Zero(h_.dim());
  p0[start] = 1.0;
  return classical(p0, t);
}

ProbabilityVector Propagator::classical(const Eigen::VectorXd& p0, double t) const {
  check_time(t);
  if (p0.size() != h_.dim()) throw InvalidArgument("initial vector has wrong dimension");
  ProbabilityVector out;
  out.time = t;
  if (t == 0.0) {
    out.values = p0;
  } else if (eig_) {
    Eigen::VectorXd coef = eig_->vectors.transpose() * p0;
    for (int k = 0; k < coef.size(); ++k) coef[k] *= std::exp(-eig_->values[k] * t);
    out.values = eig_->vectors * coef;
    out.error_bound = 1e-13 * h_.dim();
  } else {
    out.values = uniformized(h_, p0, t, tol_, &out.error_bound);
  }
  return out;
}

StateVector Propagator::quantum(const StateVector& psi0, double t) const {
  if (psi0.amplitudes.size() != h_.dim()) throw InvalidArgument("state has wrong dimension");
  StateVector out;
  out.time = psi0.time + t;
  if (t == 0.0) {
    out.amplitudes = psi0.amplitudes;
    out.error_bound = psi0.error_bound;
    return out;
  }
  if (eig_) {
    const Eigen::MatrixXd& v = eig_->vectors;
    Eigen::VectorXd re = v.transpose() * psi0.amplitudes.real();
    Eigen::VectorXd im = v.transpose() * psi0.amplitudes.imag();
    for (int k = 0; k < re.size(); ++k) {
      const cplx z = cplx(re[k], im[k]) * std::polar(1.0, -eig_->values[k] * t);
      re[k] = z.real();
      im[k] = z.imag();
    }
    out.amplitudes.resize(h_.dim());
    out.amplitudes.real() = v * re;
    out.amplitudes.imag() = v * im;
    out.error_bound = psi0.error_bound + 1e-13 * std::sqrt(double(h_.dim()));
  } else {
    double err = 0.0;
    out.amplitudes = chebyshev_expm(h_, psi0.amplitudes, t, tol_, &err);
    out.error_bound = psi0.error_bound + err;
  }
  return out;
}

ProbabilityVector classical_propagate(const GraphHamiltonian& h, int start, double t) {
  check_time(t);
  return Propagator(h).classical(start, t);
}

StateVector quantum_propagate(const GraphHamiltonian& h, const StateVector& psi0, double t) {
  return Propagator(h).quantum(psi0, t);
}

PenetrabilityReport penetrability_probe(const DecisionTree& t, const GraphHamiltonian& h,
                                        WalkMode mode, double t_max, double dt,
                                        const std::optional<StateVector>& psi0) {
  if (h.dim() != t.size()) throw InvalidArgument("Hamiltonian does not match the tree");
  t.unique_target();
  if (!(dt > 0.0) || !(t_max >= 0.0)) throw InvalidArgument("need dt > 0 and t_max >= 0");
  if (psi0 && mode != WalkMode::Quantum) {
    throw InvalidArgument("an initial state applies to quantum probes only");
  }
  std::vector<int> target_set;
  for (int id = 0; id < t.size(); ++id) {
    if (t.level(id) >= t.n_levels()) target_set.push_back(id);
  }

  PenetrabilityReport rep;
  rep.n = t.n_levels();
  const long steps = std::lround(t_max / dt);
  rep.t_grid.reserve(steps + 1);
  auto record = [&](double time, double p, double total) {
    rep.t_grid.push_back(time);
    rep.prob_target.push_back(p);
    rep.norm_residual.push_back(std::abs(total - 1.0));
    if (p > rep.max_prob) {
      rep.max_prob = p;
      rep.argmax_t = time;
    }
  };

  if (mode == WalkMode::Classical) {
    Propagator prop(h);
    if (prop.is_dense()) {
      const Eigen::MatrixXd& v = prop.eigenvectors();
      const Eigen::VectorXd& lam = prop.eigenvalues();
      Eigen::VectorXd target_rows = Eigen::VectorXd::Zero(h.dim());
      for (int s : target_set) target_rows += v.row(s).transpose();
      const Eigen::VectorXd col_sums = v.colwise().sum().transpose();
      const Eigen::VectorXd q = v.row(t.root()).transpose();
      for (long i = 0; i <= steps; ++i) {
        const double time = i * dt;
        double p = 0.0;
        double total = 0.0;
        for (int k = 0; k < h.dim(); ++k) {
          const double w = q[k] * std::exp(-lam[k] * time);
          p += target_rows[k] * w;
          total += col_sums[k] * w;
        }
        record(time, p, total);
      }
    } else {
      Eigen::VectorXd p = Eigen::VectorXd::Zero(h.dim());
      p[t.root()] = 1.0;
      for (long i = 0; i <= steps; ++i) {
        if (i > 0) p = uniformized(h, p, dt, 1e-14, nullptr);
        double pt = 0.0;
        for (int s : target_set) pt += p[s];
        record(i * dt, pt, p.sum());
      }
    }
    return rep;
  }

  Eigen::VectorXcd psi = psi0 ? psi0->amplitudes : StateVector::basis(h.dim(), t.root()).amplitudes;
  if (psi.size() != h.dim()) throw InvalidArgument("initial state has wrong dimension");
  for (long i = 0; i <= steps; ++i) {
    if (i > 0) psi = chebyshev_expm(h, psi, dt, 1e-14);
    double pt = 0.0;
    for (int s : target_set) pt += std::norm(psi[s]);
    record(i * dt, pt, psi.squaredNorm());
  }
  return rep;
}

namespace {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n.
GaussRule gauss_legendre(int n) {
  GaussRule g;
  g.nodes.resize(n);
  g.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    g.nodes[i] = x;
    g.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return g;
}

}  // namespace

CauchyCheck cauchy_relation_check(const GraphHamiltonian& h, int a, int b, double t,
                                  double t_cut) {
  if (!(t > 0.0) || !(t_cut > 0.0)) throw InvalidArgument("need t > 0 and T_cut > 0");
  if (a < 0 || b < 0 || a >= h.dim() || b >= h.dim()) throw InvalidArgument("node out of range");
  if (h.dim() >= Propagator::kDenseDim) {
    throw CapacityError("Cauchy check needs a dense eigendecomposition");
  }
  Propagator prop(h);
  const Eigen::VectorXd& lam = prop.eigenvalues();
  const Eigen::MatrixXd& v = prop.eigenvectors();
  std::vector<double> energy;
  std::vector<double> weight;
  double zero_weight = 0.0;
  CauchyCheck out;
  for (int k = 0; k < h.dim(); ++k) {
    const double w = v(b, k) * v(a, k);
    out.classical += w * std::exp(-lam[k] * t);
    if (std::abs(lam[k]) < 1e-9) zero_weight += w;
    energy.push_back(lam[k]);
    weight.push_back(w);
  }

  auto integrand = [&](double tp) {
    cplx amp = 0.0;
    for (std::size_t k = 0; k < energy.size(); ++k) amp += weight[k] * std::polar(1.0, -energy[k] * tp);
    return (amp / cplx(t, -tp)).real();
  };
  // Panels resolve both the fastest oscillation and the 1/(t - it') peak.
  const double emax = std::max(lam.cwiseAbs().maxCoeff(), 1.0);
  const double width = std::min({0.5 / emax * std::numbers::pi, 0.5 * t, 1.0});
  const long panels = static_cast<long>(std::ceil(t_cut / width));
  const double hstep = t_cut / panels;
  auto integrate = [&](const GaussRule& g) {
    double sum = 0.0;
    for (long p = 0; p < panels; ++p) {
      const double mid = (p + 0.5) * hstep;
      for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        sum += g.weights[i] * integrand(mid + 0.5 * hstep * g.nodes[i]);
      }
    }
    return 0.5 * hstep * sum;
  };
  const double coarse = integrate(gauss_legendre(10));
  const double fine = integrate(gauss_legendre(14));
  if (std::abs(fine - coarse) > 1e-8 * std::max(1.0, std::abs(fine))) {
    throw ContractError("Cauchy quadrature did not converge");
  }
  out.integral = fine / std::numbers::pi;
  out.zero_mode_term = zero_weight * (1.0 - std::atan(t_cut / t) / std::numbers::pi);
  out.discrepancy = std::abs(out.integral + out.zero_mode_term - out.classical);
  return out;
}

}  // namespace qwalk
