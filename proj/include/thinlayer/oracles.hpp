#pragma once

#include <vector>

namespace thinlayer {

/// (k pi / L)^2 + (m pi / (2 eps))^2, minus (pi / (2 eps))^2 when renormalized.
double oracle_rectangle(double length, double eps, int k, int m, bool renormalized = false);

/// m^2 / R^2 - 1 / (4 R^2) for m = 0, +-1, +-2, ..., ascending.
std::vector<double> oracle_circle_heff(double radius, int count);

/// Lowest Dirichlet eigenvalues k^2 of the annulus R - eps < r < R + eps,
/// from the zeros of J_m(k a) Y_m(k b) - J_m(k b) Y_m(k a), with multiplicity 2
/// for m >= 1.
std::vector<double> oracle_annulus(double radius, double eps, int count);

/// Cross product J_m(k a) Y_m(k b) - J_m(k b) Y_m(k a).
double annulus_cross_product(int m, double k, double a, double b);

}  // namespace thinlayer
