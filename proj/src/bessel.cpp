#include "qwalk/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "qwalk/error.hpp"

namespace qwalk {

std::vector<double> bessel_j_all(int order_max, double x) {
  if (order_max < 0) throw InvalidArgument("Bessel order must be non-negative");
  if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidArgument("Bessel argument must be >= 0");
  std::vector<double> out(static_cast<std::size_t>(order_max) + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  // Start well above both the requested order and the turning point k ~ x.
  const int top_base = std::max(order_max, static_cast<int>(std::ceil(x)));
  int start = top_base + 30 + static_cast<int>(std::sqrt(60.0 * top_base));
  if (start % 2) ++start;

  std::vector<double> j(static_cast<std::size_t>(start) + 2, 0.0);
  j[start + 1] = 0.0;
  j[start] = 1e-300;
  double sum = 0.0;
  for (int k = start; k >= 1; --k) {
    j[k - 1] = (2.0 * k / x) * j[k] - j[k + 1];
    if (std::abs(j[k - 1]) > 1e250) {
      for (int i = k - 1; i <= start; ++i) j[i] *= 1e-250;
      sum *= 1e-250;
    }
    if ((k - 1) % 2 == 0 && k - 1 > 0) sum += 2.0 * j[k - 1];
  }
  sum += j[0];
  for (int k = 0; k <= order_max; ++k) out[k] = j[k] / sum;
  return out;
}

double bessel_j(int d, double x) {
  const int ad = std::abs(d);
  double sign = 1.0;
  if (d < 0 && (ad % 2)) sign = -sign;
  if (x < 0.0 && (ad % 2)) sign = -sign;
  return sign * bessel_j_all(ad, std::abs(x))[ad];
}

std::complex<double> bessel_reference(int d, double t) {
  if (std::abs(d) > 200) throw InvalidArgument("bessel_reference needs |d| <= 200");
  if (!(std::abs(t) <= 100.0)) throw InvalidArgument("bessel_reference needs |t| <= 100");
  static const std::complex<double> ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const std::complex<double> phase = std::polar(1.0, -2.0 * t) * ipow[((d % 4) + 4) % 4];
  return phase * bessel_j(d, 2.0 * t);
}

}  // namespace qwalk
