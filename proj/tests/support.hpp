#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "thinlayer/assembly.hpp"
#include "thinlayer/geometry.hpp"
#include "thinlayer/layer.hpp"

namespace testing_support {

using namespace thinlayer;

struct Setup {
  Chart chart;
  Grid layer;
  Grid surface;
  GeometryFields geometry;
};

inline Setup make_setup(const std::string& preset, std::vector<int> cells, int nu, const PresetParams& params = {}) {
  Chart chart = preset_chart(preset, params);
  Grid layer = build_grid(chart, cells, nu);
  Grid surface = layer.surface();
  GeometryFields geo = evaluate_geometry(chart, surface);
  return {std::move(chart), std::move(layer), std::move(surface), std::move(geo)};
}

inline SurfVec point1(double t) {
  SurfVec p(1);
  p << t;
  return p;
}

inline SurfVec point2(double a, double b) {
  SurfVec p(2);
  p << a, b;
  return p;
}

}  // namespace testing_support
