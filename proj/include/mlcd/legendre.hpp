#pragma once

#include <vector>

#include "mlcd/types.hpp"

namespace mlcd {

/// Associated Legendre function P_l^m(x) with the Condon-Shortley phase.
/// Negative orders use P_l^{-m} = (-1)^m (l-m)!/(l+m)! P_l^m.
double legendre_assoc(int l, int m, double x);

/// Legendre polynomials P_0(x) .. P_lmax(x) by the three-term recurrence.
std::vector<double> legendre_all(int lmax, double x);

/// (l-m)!/(l+m)! evaluated as a running product; m may be negative.
double factorial_ratio(int l, int m);

/// Complex spherical harmonic Y_l^m at colatitude theta, longitude phi.
cdouble spherical_harmonic(int l, int m, double theta, double phi);

}  // namespace mlcd
