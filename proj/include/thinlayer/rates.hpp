#pragma once

#include <span>
#include <string_view>

namespace thinlayer {

enum class FitStatus { Ok, Exact, TooFewPoints, NonPositive };

std::string_view to_string(FitStatus s);

/// Least squares of ln e against ln eps.
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points = 0;
  FitStatus status = FitStatus::Ok;
};

/// When every error is at most `exact_floor` the status is Exact and the slope
/// is +infinity. Fewer than 3 points, or a nonpositive error above the
/// floor, leave the slope NaN.
RateFit fit_rate(std::span<const double> eps, std::span<const double> errors, double exact_floor);

}  // namespace thinlayer
