#pragma once

#include <span>
#include <vector>

#include "thinlayer/grid.hpp"

namespace thinlayer::fd {

/// Derivative of a node field (all grid nodes, boundary included) along one
/// axis. `order` is the accuracy order (2 or 4), `derivative` is 1 or 2.
/// Periodic axes wrap; Dirichlet axes switch to one-sided stencils near the
/// ends so that every node, boundary nodes included, gets a value.
std::vector<double> derivative_along(const Grid& grid, int axis, std::span<const double> values,
                                     int order, int derivative);

/// Same stencils on a single line of equally spaced samples.
std::vector<double> derivative_1d(std::span<const double> values, double h, bool periodic,
                                  int order, int derivative);

}  // namespace thinlayer::fd
