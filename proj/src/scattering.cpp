#include "qwalk/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "qwalk/error.hpp"
#include "qwalk/parallel.hpp"

namespace qwalk {

namespace {

constexpr double kRoot2 = std::numbers::sqrt2;
constexpr double kPoleCondition = 1e12;
constexpr int kGenericBushLimit = 4096;

}  // namespace

BushRatio bush_ratio_generic(const ExplicitBush& bush, double E) {
  const int n = bush.size();
  if (n == 0) return {E, 1.0, false};
  if (n > kGenericBushLimit) {
    throw CapacityError("explicit bush with " + std::to_string(n) + " nodes exceeds " +
                        std::to_string(kGenericBushLimit));
  }
  bush.heights();
  std::vector<int> children(static_cast<std::size_t>(n), 0);
  for (int i = 1; i < n; ++i) ++children[bush.parent[i]];
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0 + children[i] - E;
  for (int i = 1; i < n; ++i) {
    m(i, bush.parent[i]) = -1.0;
    m(bush.parent[i], i) = -1.0;
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[0] = 1.0;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  const double rcond = lu.rcond();
  Eigen::VectorXd psi = lu.solve(rhs);
  if (!(rcond > 1e-15) || !psi.allFinite()) {
    Eigen::MatrixXd hb = m + E * Eigen::MatrixXd::Identity(n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hb, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = es.eigenvalues();
    Eigen::Index best = 0;
    (ev.array() - E).abs().minCoeff(&best);
    throw PoleError(E, ev[best],
                    "energy " + std::to_string(E) + " sits on the bush eigenvalue " +
                        std::to_string(ev[best]));
  }
  return {E, psi[0], 1.0 / rcond > kPoleCondition};
}

BushRatio bush_ratio_perfect(int k, double E) {
  if (k < 1) throw InvalidArgument("perfect bush height must be >= 1");
  if (!std::isfinite(E)) throw InvalidArgument("energy must be finite");
  const double c = (3.0 - E) / (2.0 * kRoot2);
  double num = 0.0;
  double den = 0.0;
  if (std::sqrt(std::abs(1.0 - c * c)) < 1e-7) {
    // Band edge: sin(j t) / sin(t) -> U_{j-1}(c).
    double u_prev = 0.0;  // U_{-1}
    double u = 1.0;       // U_0
    std::vector<double> us{u_prev, u};
    for (int j = 1; j <= k; ++j) {
      const double next = 2.0 * c * u - u_prev;
      u_prev = u;
      u = next;
      us.push_back(u);
    }
    // us[j + 1] == U_j
    num = kRoot2 * us[k - 1] - us[k];
    den = kRoot2 * us[k] - us[k + 1];
  } else if (c > 1.0) {
    const double s = std::sqrt(1.0 - 6.0 * E + E * E);
    const double delta = 2.0 * E / ((1.0 - E) + s);
    const double q = (1.0 + delta) / kRoot2;
    const double q2k2 = std::pow(q, 2.0 * k - 2.0);
    num = delta + q2k2 * (q * q - 1.0 - delta);
    den = delta / q + q2k2 * q * q * (q - kRoot2);
  } else if (c < -1.0) {
    const double q = std::exp(-std::acosh(-c));
    const double q2k = std::pow(q, 2.0 * k);
    num = -kRoot2 * q * (1.0 - q2k / (q * q)) - (1.0 - q2k);
    den = kRoot2 * (1.0 - q2k) + (1.0 - q2k * q * q) / q;
  } else {
    const double t = std::acos(c);
    num = kRoot2 * std::sin((k - 1) * t) - std::sin(k * t);
    den = kRoot2 * std::sin(k * t) - std::sin((k + 1) * t);
  }
  if (std::abs(den) < 1e-14) {
    throw PoleError(E, E, "energy " + std::to_string(E) + " is a resonance of the height-" +
                              std::to_string(k) + " bush");
  }
  return {E, num / (kRoot2 * den), std::abs(den) < 1e-9};
}

BushRatio bush_ratio(const BushSpec& spec, double E) {
  if (const auto* p = std::get_if<PerfectBush>(&spec)) return bush_ratio_perfect(p->height, E);
  if (const auto* e = std::get_if<ExplicitBush>(&spec)) return bush_ratio_generic(*e, E);
  return {E, 1.0, false};
}

long double TransferMatrix::det() const { return (a * d - b * c) * std::exp(2.0L * log_scale); }

TransferMatrix step_matrix(double E, double y) {
  return {3.0L - static_cast<long double>(E) - y, -1.0L, 1.0L, 0.0L, 0.0L};
}

namespace {

TransferMatrix multiply_left(const TransferMatrix& s, const TransferMatrix& m) {
  TransferMatrix r;
  r.a = s.a * m.a + s.b * m.c;
  r.b = s.a * m.b + s.b * m.d;
  r.c = s.c * m.a + s.d * m.c;
  r.d = s.c * m.b + s.d * m.d;
  r.log_scale = s.log_scale + m.log_scale;
  const long double big = std::max({std::abs(r.a), std::abs(r.b), std::abs(r.c), std::abs(r.d)});
  if (big > 1e64L) {
    r.a /= big;
    r.b /= big;
    r.c /= big;
    r.d /= big;
    r.log_scale += std::log(big);
  }
  return r;
}

void check_form(const BaseBushForm& b) {
  if (b.base_length < 1) throw InvalidArgument("base length must be at least 1");
  if (static_cast<int>(b.bushes.size()) != b.base_length - 1) {
    throw InvalidArgument("need one bush spec for each base position 0..n-2");
  }
}

// Per-energy ratios, reusing one evaluation per perfect-bush height.
std::vector<BushRatio> ratios_at(const BaseBushForm& b, double E) {
  std::vector<BushRatio> out;
  out.reserve(b.bushes.size());
  std::vector<std::optional<BushRatio>> perfect_cache;
  for (const auto& spec : b.bushes) {
    if (const auto* p = std::get_if<PerfectBush>(&spec)) {
      if (static_cast<int>(perfect_cache.size()) <= p->height) perfect_cache.resize(p->height + 1);
      auto& slot = perfect_cache[p->height];
      if (!slot) slot = bush_ratio_perfect(p->height, E);
      out.push_back(*slot);
    } else {
      out.push_back(bush_ratio(spec, E));
    }
  }
  return out;
}

TransferMatrix product(const std::vector<BushRatio>& ys, int n, double E) {
  TransferMatrix m;
  for (int j = 0; j < n; ++j) {
    const double y = j + 1 < n ? ys[j].value : 1.0;
    m = multiply_left(step_matrix(E, y), m);
  }
  return m;
}

}  // namespace

TransferMatrix transfer_matrix(const BaseBushForm& b, double E) {
  check_form(b);
  return product(ratios_at(b, E), b.base_length, E);
}

double theta_of_energy(double E) {
  if (!(E >= 0.0 && E <= 4.0)) throw InvalidArgument("energy outside the runway band [0, 4]");
  return 2.0 * std::asin(std::sqrt(E) / 2.0);
}

double energy_of_theta(double theta) {
  const double s = std::sin(theta / 2.0);
  return 4.0 * s * s;
}

ScatteringResult transmission(const BaseBushForm& b, double E) {
  check_form(b);
  if (!(E > 0.0 && E < 4.0)) {
    throw InvalidArgument("transmission needs 0 < E < 4, got " + std::to_string(E));
  }
  const auto ys = ratios_at(b, E);
  const int n = b.base_length;
  ScatteringResult r;
  r.E = E;
  r.theta = theta_of_energy(E);
  r.M = product(ys, n, E);
  for (const auto& y : ys) r.pole_flag = r.pole_flag || y.pole_flag;

  using cld = std::complex<long double>;
  const long double th = 2.0L * std::asin(std::sqrt(static_cast<long double>(E)) / 2.0L);
  const long double s = std::sin(th);
  const long double co = std::cos(th);
  const auto& m = r.M;
  const cld denom(m.c - m.b + (m.d - m.a) * co, (m.d + m.a) * s);
  const cld t = std::polar(1.0L, -n * th) * cld(0.0L, 2.0L * s) / denom * std::exp(-m.log_scale);
  const cld e1 = std::polar(1.0L, th);
  const cld r_num = m.c * e1 + m.d - m.a - m.b / e1;
  const cld r_den = m.a + m.b * e1 - m.c * e1 - m.d * e1 * e1;
  const cld rr = r_num / r_den;
  r.T = {static_cast<double>(t.real()), static_cast<double>(t.imag())};
  r.R = {static_cast<double>(rr.real()), static_cast<double>(rr.imag())};
  r.unitarity_residual =
      static_cast<double>(std::abs(std::norm(t) + std::norm(rr) - 1.0L));
  return r;
}

std::vector<ScatteringResult> transmission_sweep(const BaseBushForm& b,
                                                 const std::vector<double>& energies) {
  check_form(b);
  for (double E : energies) {
    if (!(E > 0.0 && E < 4.0)) {
      throw InvalidArgument("sweep energies must lie in (0, 4), got " + std::to_string(E));
    }
  }
  std::vector<ScatteringResult> out(energies.size());
  parallel_for(energies.size(), [&](std::size_t i) {
    try {
      out[i] = transmission(b, energies[i]);
    } catch (const PoleError&) {
      ScatteringResult r;
      r.E = energies[i];
      r.theta = theta_of_energy(energies[i]);
      const double nan = std::numeric_limits<double>::quiet_NaN();
      r.T = {nan, nan};
      r.R = {nan, nan};
      r.unitarity_residual = nan;
      r.pole_flag = true;
      r.at_pole = true;
      out[i] = r;
    }
  });
  return out;
}

WavePacket make_packet(int runway_length, int center_level, double theta0, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("packet width must be positive");
  if (!(theta0 > 0.0 && theta0 < std::numbers::pi)) {
    throw InvalidArgument("packet momentum must lie in (0, pi)");
  }
  if (center_level - 5.0 * sigma < -runway_length || center_level + 5.0 * sigma > -1.0) {
    throw InvalidArgument("packet must sit at least 5 sigma inside the start runway");
  }
  WavePacket p{center_level, theta0, sigma, runway_length, Eigen::VectorXcd(runway_length)};
  for (int i = 0; i < runway_length; ++i) {
    const double j = -runway_length + i;
    const double g = (j - center_level) / (2.0 * sigma);
    p.amplitudes[i] = std::polar(std::exp(-g * g), theta0 * j);
  }
  p.amplitudes.normalize();
  return p;
}

double default_packet_time(const BaseBushForm& b, const WavePacket& packet) {
  const double v = 2.0 * std::sin(packet.theta0);
  return 2.0 * (std::abs(packet.center_level) + b.base_length + 10.0 * packet.sigma) / v;
}

PacketResult packet_transmission(const BaseBushForm& b, const WavePacket& packet, double t_final) {
  check_form(b);
  if (!(t_final >= 0.0)) throw InvalidArgument("t_final must be >= 0");
  if (packet.runway_length != b.start_runway) {
    throw InvalidArgument("packet was built for a different start runway length");
  }
  const double tail = packet.center_level - 5.0 * packet.sigma;
  if (tail + b.start_runway < 2.0 * t_final) {
    throw InvalidArgument("start runway too short: amplitude reaches its far end before t_final");
  }
  if (b.end_runway + b.base_length - packet.center_level - 5.0 * packet.sigma < 2.0 * t_final) {
    throw InvalidArgument("end runway too short: amplitude reaches its far end before t_final");
  }

  const bool perfect = std::none_of(b.bushes.begin(), b.bushes.end(), [](const BushSpec& s) {
    return std::holds_alternative<ExplicitBush>(s);
  });
  PacketResult res;
  res.t_final = t_final;
  res.reduced = perfect;
  Eigen::VectorXcd psi;
  std::vector<int> start_sites;
  std::vector<int> end_sites;
  if (perfect) {
    const EffectiveChain chain = reduce_perfect_bushes(b);
    psi = Eigen::VectorXcd::Zero(chain.h.dim());
    psi.head(b.start_runway) = packet.amplitudes;
    psi = chebyshev_expm(chain.h, psi, t_final, 1e-12);
    for (int i = 0; i < b.start_runway; ++i) start_sites.push_back(i);
    for (int i = 0; i < b.end_runway; ++i) end_sites.push_back(chain.end_runway_begin() + i);
  } else {
    const DecisionTree tree = from_base_bush_form(b);
    const GraphHamiltonian h = hamiltonian_from_tree(tree);
    psi = Eigen::VectorXcd::Zero(h.dim());
    psi.head(b.start_runway) = packet.amplitudes;
    psi = chebyshev_expm(h, psi, t_final, 1e-12);
    for (int id = 0; id < tree.size(); ++id) {
      if (tree.level(id) < 0) start_sites.push_back(id);
      if (tree.level(id) > tree.n_levels()) end_sites.push_back(id);
    }
  }
  for (int s : end_sites) res.transmitted += std::norm(psi[s]);
  for (int s : start_sites) res.reflected += std::norm(psi[s]);
  res.norm_residual = std::abs(psi.squaredNorm() - 1.0);

  const double e0 = energy_of_theta(packet.theta0);
  try {
    res.T2_center = std::norm(transmission(b, e0).T);
  } catch (const PoleError&) {
    res.T2_center = std::numeric_limits<double>::quiet_NaN();
  }
  // |phi(theta)|^2 ~ exp(-2 sigma^2 (theta - theta0)^2).
  const int samples = 601;
  const double half = 6.0 / (2.0 * packet.sigma);
  double wsum = 0.0;
  double acc = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double th = packet.theta0 - half + 2.0 * half * i / (samples - 1);
    if (!(th > 0.0 && th < std::numbers::pi)) continue;
    const double dth = th - packet.theta0;
    const double w = std::exp(-2.0 * packet.sigma * packet.sigma * dth * dth);
    try {
      acc += w * std::norm(transmission(b, energy_of_theta(th)).T);
      wsum += w;
    } catch (const PoleError&) {
    }
  }
  res.T2_packet_average = wsum > 0.0 ? acc / wsum : std::numeric_limits<double>::quiet_NaN();
  return res;
}

std::vector<BoundState> bound_state_scan(const DecisionTree& t, const GraphHamiltonian& h) {
  if (h.dim() != t.size()) throw InvalidArgument("Hamiltonian does not match the tree");
  // Runway sites ordered by distance from the junction.
  std::vector<int> runway;
  if (t.start_runway_length() >= 50) {
    for (int j = 1; j <= t.start_runway_length(); ++j) runway.push_back(t.start_runway_length() - j);
  } else if (t.end_runway_length() >= 50) {
    for (int j = 1; j <= t.end_runway_length(); ++j) runway.push_back(t.nodes_at_level(t.n_levels() + j).front());
  } else {
    throw InvalidArgument("bound-state scan needs a runway of at least 50 sites");
  }
  const Spectrum spec = spectrum(h, true);
  std::vector<BoundState> out;
  for (int k = 0; k < spec.values.size(); ++k) {
    const double E = spec.values[k];
    if (E < 4.0 + 1e-6 || E > 6.0 + 1e-9) continue;
    const Eigen::VectorXd v = spec.vectors.col(k);
    const double first = std::abs(v[runway[0]]);
    if (first < 1e-8) continue;
    std::vector<double> xs;
    std::vector<double> ls;
    const std::size_t limit = runway.size() / 2;
    for (std::size_t j = 0; j < limit; ++j) {
      const double a = std::abs(v[runway[j]]);
      if (a < 1e-7 * first) break;
      xs.push_back(static_cast<double>(j + 1));
      ls.push_back(std::log(a));
    }
    if (xs.size() < 3) continue;
    const double nx = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ls[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ls[i];
    }
    const double slope = (nx * sxy - sx * sy) / (nx * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / nx;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ls[i] - (icpt + slope * xs[i]);
      rss += r * r;
    }
    BoundState bs;
    bs.energy = E;
    bs.alpha = -slope;
    bs.fit_residual = std::sqrt(rss / nx);
    bs.consistency = std::abs(E - (2.0 + 2.0 * std::cosh(bs.alpha)));
    out.push_back(bs);
  }
  return out;
}

}  // namespace qwalk
