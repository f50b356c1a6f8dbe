#include "thinlayer/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "thinlayer/errors.hpp"

namespace thinlayer {

double oracle_rectangle(double length, double eps, int k, int m, bool renormalized) {
  if (!(length > 0.0) || !(eps > 0.0) || k < 1 || m < 1)
    throw Error(ErrorCode::InvalidParams, "rectangle oracle needs positive arguments");
  const double pi = std::numbers::pi;
  const double along = k * pi / length;
  const double across = m * pi / (2.0 * eps);
  const double ground = pi / (2.0 * eps);
  return along * along + across * across - (renormalized ? ground * ground : 0.0);
}

std::vector<double> oracle_circle_heff(double radius, int count) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidParams, "radius must be positive");
  std::vector<double> out;
  const double r2 = radius * radius;
  for (int m = 0; static_cast<int>(out.size()) < count; ++m) {
    const double v = m * m / r2 - 0.25 / r2;
    out.push_back(v);
    if (m > 0 && static_cast<int>(out.size()) < count) out.push_back(v);
  }
  return out;
}

double annulus_cross_product(int m, double k, double a, double b) {
  const double nu = m;
  return std::cyl_bessel_j(nu, k * a) * std::cyl_neumann(nu, k * b) -
         std::cyl_bessel_j(nu, k * b) * std::cyl_neumann(nu, k * a);
}

namespace {

// Roots of the cross product for one order m in (0, k_max], by sign changes on
// a uniform k grid refined by bisection.
std::vector<double> order_roots(int m, double a, double b, double k_max, double dk) {
  std::vector<double> roots;
  double k0 = 0.5 * dk;
  double f0 = annulus_cross_product(m, k0, a, b);
  while (k0 < k_max) {
    const double k1 = k0 + dk;
    const double f1 = annulus_cross_product(m, k1, a, b);
    if (f0 == 0.0) {
      roots.push_back(k0);
    } else if (f0 * f1 < 0.0) {
      double lo = k0, hi = k1, flo = f0;
      while (hi - lo > 1e-13 * hi) {
        const double mid = 0.5 * (lo + hi);
        const double fm = annulus_cross_product(m, mid, a, b);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    k0 = k1;
    f0 = f1;
  }
  return roots;
}

}  // namespace

std::vector<double> oracle_annulus(double radius, double eps, int count) {
  if (!(eps > 0.0) || !(eps < radius)) throw Error(ErrorCode::InvalidParams, "annulus oracle needs 0 < eps < R");
  if (count < 1) return {};
  const double a = radius - eps;
  const double b = radius + eps;
  // Radial roots of one order are about pi / (b - a) apart.
  const double dk = std::numbers::pi / (b - a) / 64.0;

  // The first root of order `count` bounds the `count` lowest values, since
  // orders 0..count-1 each contribute at least one smaller root.
  double k_max = 0.0;
  {
    const double guess = std::numbers::pi / (b - a) + 2.0 * count / a;
    const auto r = order_roots(count, a, b, 4.0 * guess, dk);
    if (r.empty()) throw Error(ErrorCode::RootBracketFailure, fmt::format("no root for order {}", count));
    k_max = r.front();
  }
  std::vector<double> values;
  for (int m = 0;; ++m) {
    const auto r = order_roots(m, a, b, k_max * (1.0 + 1e-12), dk);
    if (r.empty()) {
      if (m == 0) throw Error(ErrorCode::RootBracketFailure, "no root for order 0");
      break;
    }
    for (double k : r) {
      values.push_back(k * k);
      if (m > 0) values.push_back(k * k);
    }
  }
  std::sort(values.begin(), values.end());
  if (static_cast<int>(values.size()) < count)
    throw Error(ErrorCode::RootBracketFailure, "fewer annulus eigenvalues than requested");
  values.resize(static_cast<std::size_t>(count));
  return values;
}

}  // namespace thinlayer
