#pragma once

#include "relux/network.hpp"

#include <vector>

namespace relux {

/// Point with nonzero second derivative used by the square block.
double catalog_alpha(Activation a);
/// Point with nonzero first derivative used by the identity block.
double catalog_deriv_point(Activation a);
BigFloat catalog_deriv_point_mp(Activation a);

/// rho^{(j)}(c) / j! for j = 0 .. count-1, at the current BigFloat precision.
std::vector<BigFloat> taylor_coeffs_mp(Activation a, const BigFloat& c, int count);

/// Same in binary64 (computed internally with extra precision).
std::vector<double> taylor_coeffs(Activation a, double c, int count);

/// Closed-form evaluation without the expansion cache.
BigFloat activate_direct(Activation a, const BigFloat& x);

}  // namespace relux
