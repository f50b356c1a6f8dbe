#include "thinlayer/finite_difference.hpp"

#include <array>
#include <cstddef>
#include <stdexcept>

namespace thinlayer::fd {
namespace {

// Offsets and weights of a stencil centred (or shifted) at the target node.
struct Stencil {
  std::array<int, 6> offset{};
  std::array<double, 6> weight{};
  int size = 0;
  double scale = 1.0;  // divide by scale * h^derivative
};

Stencil central(int order, int derivative) {
  if (derivative == 1 && order == 2) return {{-1, 1}, {-1.0, 1.0}, 2, 2.0};
  if (derivative == 1 && order == 4) return {{-2, -1, 1, 2}, {1.0, -8.0, 8.0, -1.0}, 4, 12.0};
  if (derivative == 2 && order == 2) return {{-1, 0, 1}, {1.0, -2.0, 1.0}, 3, 1.0};
  if (derivative == 2 && order == 4)
    return {{-2, -1, 0, 1, 2}, {-1.0, 16.0, -30.0, 16.0, -1.0}, 5, 12.0};
  throw std::invalid_argument("unsupported stencil");
}

// One-sided stencil for a node `dist` positions from the left end.
Stencil left_sided(int order, int derivative, int dist) {
  if (derivative == 1 && order == 2) return {{0, 1, 2}, {-3.0, 4.0, -1.0}, 3, 2.0};
  if (derivative == 1 && order == 4) {
    if (dist == 0) return {{0, 1, 2, 3, 4}, {-25.0, 48.0, -36.0, 16.0, -3.0}, 5, 12.0};
    return {{-1, 0, 1, 2, 3}, {-3.0, -10.0, 18.0, -6.0, 1.0}, 5, 12.0};
  }
  if (derivative == 2 && order == 2) return {{0, 1, 2, 3}, {2.0, -5.0, 4.0, -1.0}, 4, 1.0};
  if (derivative == 2 && order == 4) {
    if (dist == 0)
      return {{0, 1, 2, 3, 4, 5}, {45.0, -154.0, 214.0, -156.0, 61.0, -10.0}, 6, 12.0};
    return {{-1, 0, 1, 2, 3, 4}, {10.0, -15.0, -4.0, 14.0, -6.0, 1.0}, 6, 12.0};
  }
  throw std::invalid_argument("unsupported stencil");
}

Stencil mirrored(Stencil s, int derivative) {
  for (int k = 0; k < s.size; ++k) {
    s.offset[static_cast<std::size_t>(k)] = -s.offset[static_cast<std::size_t>(k)];
    if (derivative == 1) s.weight[static_cast<std::size_t>(k)] = -s.weight[static_cast<std::size_t>(k)];
  }
  return s;
}

}  // namespace

std::vector<double> derivative_1d(std::span<const double> f, double h, bool periodic, int order,
                                  int derivative) {
  const int n = static_cast<int>(f.size());
  const int half = order / 2;
  if (n < 2 * half + 2) throw std::invalid_argument("line too short for stencil");
  double hpow = derivative == 1 ? h : h * h;
  std::vector<double> out(f.size());
  const Stencil c = central(order, derivative);
  for (int i = 0; i < n; ++i) {
    Stencil s = c;
    if (!periodic) {
      if (i < half) s = left_sided(order, derivative, i);
      else if (i >= n - half) s = mirrored(left_sided(order, derivative, n - 1 - i), derivative);
    }
    double acc = 0.0;
    for (int k = 0; k < s.size; ++k) {
      int j = i + s.offset[static_cast<std::size_t>(k)];
      if (periodic) j = ((j % n) + n) % n;
      acc += s.weight[static_cast<std::size_t>(k)] * f[static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(i)] = acc / (s.scale * hpow);
  }
  return out;
}

std::vector<double> derivative_along(const Grid& grid, int axis, std::span<const double> values,
                                     int order, int derivative) {
  if (values.size() != grid.node_count()) throw std::invalid_argument("node field size mismatch");
  const Axis& ax = grid.axis(axis);
  const auto n = static_cast<std::size_t>(ax.node_count());
  std::size_t stride = 1;
  for (int a = grid.dimension() - 1; a > axis; --a)
    stride *= static_cast<std::size_t>(grid.axis(a).node_count());
  const std::size_t block = stride * n;

  std::vector<double> out(values.size());
  std::vector<double> line(n);
  for (std::size_t outer = 0; outer < values.size(); outer += block) {
    for (std::size_t inner = 0; inner < stride; ++inner) {
      for (std::size_t i = 0; i < n; ++i) line[i] = values[outer + inner + i * stride];
      auto d = derivative_1d(line, ax.spacing(), ax.periodic(), order, derivative);
      for (std::size_t i = 0; i < n; ++i) out[outer + inner + i * stride] = d[i];
    }
  }
  return out;
}

}  // namespace thinlayer::fd
