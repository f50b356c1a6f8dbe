#include "thinlayer/rates.hpp"

#include <cmath>
#include <limits>

#include "thinlayer/errors.hpp"

namespace thinlayer {

std::string_view to_string(FitStatus s) {
  switch (s) {
    case FitStatus::Ok: return "Ok";
    case FitStatus::Exact: return "Exact";
    case FitStatus::TooFewPoints: return "TooFewPoints";
    case FitStatus::NonPositive: return "NonPositive";
  }
  return "Unknown";
}

RateFit fit_rate(std::span<const double> eps, std::span<const double> e, double exact_floor) {
  if (eps.size() != e.size()) throw Error(ErrorCode::InvalidParams, "rate fit needs matching lists");
  RateFit fit;
  fit.points = static_cast<int>(e.size());
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  fit.slope = fit.intercept = fit.r2 = nan;
  if (fit.points < 3) {
    fit.status = FitStatus::TooFewPoints;
    return fit;
  }
  bool all_small = true;
  bool nonpositive = false;
  for (double v : e) {
    all_small = all_small && std::abs(v) <= exact_floor;
    nonpositive = nonpositive || !(v > 0.0);
  }
  if (all_small) {
    fit.status = FitStatus::Exact;
    fit.slope = std::numeric_limits<double>::infinity();
    return fit;
  }
  if (nonpositive) {
    fit.status = FitStatus::NonPositive;
    return fit;
  }
  const double n = fit.points;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double x = std::log(eps[i]);
    const double y = std::log(e[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double vxx = sxx - sx * sx / n;
  const double vxy = sxy - sx * sy / n;
  const double vyy = syy - sy * sy / n;
  fit.slope = vxy / vxx;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.r2 = vyy > 0.0 ? vxy * vxy / (vxx * vyy) : 1.0;
  return fit;
}

}  // namespace thinlayer
