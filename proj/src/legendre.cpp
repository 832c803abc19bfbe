#include "mlcd/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mlcd {

namespace {

void check_degree_order(int l, int m) {
  if (l < 0 || std::abs(m) > l) {
    throw std::invalid_argument("associated Legendre: need l >= 0 and |m| <= l (l=" +
                                std::to_string(l) + ", m=" + std::to_string(m) + ")");
  }
}

double legendre_nonneg(int l, int m, double x) {
  // P_m^m = (-1)^m (2m-1)!! (1-x^2)^{m/2}
  double pmm = 1.0;
  if (m > 0) {
    const double somx2 = std::sqrt((1.0 - x) * (1.0 + x));
    double fact = 1.0;
    for (int i = 1; i <= m; ++i) {
      pmm *= -fact * somx2;
      fact += 2.0;
    }
  }
  if (l == m) {
    return pmm;
  }
  double pmmp1 = x * (2.0 * m + 1.0) * pmm;
  if (l == m + 1) {
    return pmmp1;
  }
  double pll = 0.0;
  for (int ll = m + 2; ll <= l; ++ll) {
    pll = (x * (2.0 * ll - 1.0) * pmmp1 - (ll + m - 1.0) * pmm) / (ll - m);
    pmm = pmmp1;
    pmmp1 = pll;
  }
  return pll;
}

}  // namespace

double factorial_ratio(int l, int m) {
  // (l-m)!/(l+m)! = 1 / prod_{j=l-m+1}^{l+m} j for m >= 0
  const int am = std::abs(m);
  double prod = 1.0;
  for (int j = l - am + 1; j <= l + am; ++j) {
    prod *= j;
  }
  return m >= 0 ? 1.0 / prod : prod;
}

double legendre_assoc(int l, int m, double x) {
  check_degree_order(l, m);
  if (!(std::abs(x) <= 1.0)) {
    throw std::invalid_argument("associated Legendre: |x| must be <= 1");
  }
  if (m >= 0) {
    return legendre_nonneg(l, m, x);
  }
  const int am = -m;
  const double sign = (am % 2 == 0) ? 1.0 : -1.0;
  return sign * factorial_ratio(l, am) * legendre_nonneg(l, am, x);
}

std::vector<double> legendre_all(int lmax, double x) {
  std::vector<double> p(static_cast<std::size_t>(lmax) + 1);
  p[0] = 1.0;
  if (lmax >= 1) {
    p[1] = x;
  }
  for (int l = 2; l <= lmax; ++l) {
    p[l] = ((2.0 * l - 1.0) * x * p[l - 1] - (l - 1.0) * p[l - 2]) / l;
  }
  return p;
}

cdouble spherical_harmonic(int l, int m, double theta, double phi) {
  check_degree_order(l, m);
  const double norm = std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi) * factorial_ratio(l, m));
  const double p = legendre_assoc(l, m, std::clamp(std::cos(theta), -1.0, 1.0));
  return norm * p * std::polar(1.0, m * phi);
}

}  // namespace mlcd
