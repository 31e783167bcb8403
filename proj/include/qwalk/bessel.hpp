#pragma once

#include <complex>
#include <vector>

namespace qwalk {

// J_0(x) .. J_{order_max}(x) for x >= 0 by normalized backward recurrence.
std::vector<double> bessel_j_all(int order_max, double x);

// J_d(x) for any integer order and real argument.
double bessel_j(int d, double x);

// Amplitude to move d sites in time t on the infinite line with unit hopping:
// e^{-2it} i^d J_d(2t). Requires |d| <= 200 and |t| <= 100.
std::complex<double> bessel_reference(int d, double t);

}  // namespace qwalk
