#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qwalk/evolution.hpp"
#include "qwalk/hamiltonian.hpp"
#include "qwalk/tree.hpp"

// Energy-domain scattering through a base/bush tree joined to two infinite
// runways. Everything here uses gamma = 1.

namespace qwalk {

// Amplitude one level above a base node divided by the amplitude at the base
// node, for a scattering state of energy E.
struct BushRatio {
  double E = 0.0;
  double value = 1.0;
  bool pole_flag = false;
};

// Direct linear solve of the bush equations with the base node as source.
// pole_flag is set when the condition number exceeds 1e12; an exactly
// singular system throws PoleError carrying the nearest bush eigenvalue.
BushRatio bush_ratio_generic(const ExplicitBush& bush, double E);

// Closed form for a perfect bush of height k >= 1. Outside the band
// [3 - 2 sqrt 2, 3 + 2 sqrt 2] the hyperbolic continuation is used. Throws
// PoleError when the denominator vanishes.
BushRatio bush_ratio_perfect(int k, double E);

// Dispatch on the bush kind; NoBush gives 1.
BushRatio bush_ratio(const BushSpec& spec, double E);

// Product of the base step matrices [[3 - E - y_m, -1], [1, 0]], kept as
// exp(log_scale) * [[a, b], [c, d]] so long products never overflow.
// Product of step matrices, held in extended precision.
struct TransferMatrix {
  long double a = 1.0L;
  long double b = 0.0L;
  long double c = 0.0L;
  long double d = 1.0L;
  long double log_scale = 0.0L;

  // Determinant of the unscaled product.
  long double det() const;
};

TransferMatrix step_matrix(double E, double y);
TransferMatrix transfer_matrix(const BaseBushForm& b, double E);

struct ScatteringResult {
  double E = 0.0;
  double theta = 0.0;
  std::complex<double> T{0.0, 0.0};
  std::complex<double> R{0.0, 0.0};
  double unitarity_residual = 0.0;
  TransferMatrix M;
  // True when some bush ratio sits near or on a resonance. Results at exact
  // poles carry NaN amplitudes.
  bool pole_flag = false;
  bool at_pole = false;
};

// theta = 2 asin(sqrt(E) / 2), the runway momentum at energy E in [0, 4].
double theta_of_energy(double E);
double energy_of_theta(double theta);

// Requires 0 < E < 4. Throws PoleError at a bush resonance.
ScatteringResult transmission(const BaseBushForm& b, double E);

// Evaluates every grid point (in parallel, output in grid order). Points on a
// pole are returned with at_pole set instead of throwing.
std::vector<ScatteringResult> transmission_sweep(const BaseBushForm& b,
                                                 const std::vector<double>& energies);

// Gaussian packet on the start runway, moving toward the tree. amplitudes[i]
// belongs to runway level -L + i.
struct WavePacket {
  int center_level = 0;
  double theta0 = 0.0;
  double sigma = 0.0;
  int runway_length = 0;
  Eigen::VectorXcd amplitudes;
};

// Requires the packet to sit at least 5 sigma inside both ends of the runway.
WavePacket make_packet(int runway_length, int center_level, double theta0, double sigma);

struct PacketResult {
  double transmitted = 0.0;      // probability on the end runway at t_final
  double reflected = 0.0;        // probability on the start runway at t_final
  double t_final = 0.0;
  double T2_center = 0.0;        // |T(E0)|^2
  double T2_packet_average = 0.0;  // |T|^2 averaged over the packet's momenta
  double norm_residual = 0.0;
  bool reduced = false;          // evolved on the effective chain
};

// Smallest t_final that lets the packet clear the tree in the default setup.
double default_packet_time(const BaseBushForm& b, const WavePacket& packet);

// Evolves the packet through the tree. Uses the effective chain when every
// bush is perfect, the full tree otherwise. Throws InvalidArgument when either
// runway is too short for amplitude moving at speed 2 to stay clear of its
// far end until t_final.
PacketResult packet_transmission(const BaseBushForm& b, const WavePacket& packet, double t_final);

struct BoundState {
  double energy = 0.0;
  double alpha = 0.0;
  // RMS residual of the log-linear fit on the runway.
  double fit_residual = 0.0;
  // |E - (2 + 2 cosh alpha)|.
  double consistency = 0.0;
};

// Eigenstates with E in [4 + 1e-6, 6] that reach the runway, with the decay
// rate of (-1)^j e^{alpha j} fitted on the start runway (the end runway when
// there is none). Needs a runway of at least 50 sites.
std::vector<BoundState> bound_state_scan(const DecisionTree& t, const GraphHamiltonian& h);

}  // namespace qwalk
