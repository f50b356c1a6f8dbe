#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "thinlayer/errors.hpp"
#include "thinlayer/geometry.hpp"

namespace thinlayer {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double scalar(const PresetParams& p, std::string_view key, double fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  if (it->second.size() != 1)
    throw Error(ErrorCode::InvalidParams, fmt::format("parameter '{}' expects one value", key));
  return it->second.front();
}

std::vector<double> list(const PresetParams& p, std::string_view key, std::vector<double> fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

void require(bool ok, std::string_view what) {
  if (!ok) throw Error(ErrorCode::InvalidParams, std::string(what));
}

AmbientVec v2(double x, double y) {
  AmbientVec v(2);
  v << x, y;
  return v;
}

AmbientVec v3(double x, double y, double z) {
  AmbientVec v(3);
  v << x, y, z;
  return v;
}

Chart make_curve(std::string name, ParameterRange range, std::function<EmbeddingJet(double)> jet) {
  auto point = [jet](const SurfVec& p) { return jet(p(0)).point; };
  auto full = [jet](const SurfVec& p) { return jet(p(0)); };
  return Chart(std::move(name), 2, {range}, point, full, 1.0);
}

Chart segment(const PresetParams& p) {
  const double length = scalar(p, "L", 1.0);
  require(length > 0, "segment length must be positive");
  return make_curve("segment", {0.0, length, false}, [](double t) {
    EmbeddingJet j;
    j.point = v2(t, 0.0);
    j.first[0] = v2(1.0, 0.0);
    j.second[0][0] = v2(0.0, 0.0);
    return j;
  });
}

// Circle of radius R traversed counter-clockwise by the angle
// theta(t) = t + warp sin t; warp != 0 gives a non-uniform parametrization.
Chart circle(const PresetParams& p) {
  const double radius = scalar(p, "R", 1.0);
  const double warp = scalar(p, "warp", 0.0);
  require(radius > 0, "circle radius must be positive");
  require(std::abs(warp) < 1.0, "circle warp must satisfy |warp| < 1");
  return make_curve("circle", {0.0, kTwoPi, true}, [radius, warp](double t) {
    const double th = t + warp * std::sin(t);
    const double th1 = 1.0 + warp * std::cos(t);
    const double th2 = -warp * std::sin(t);
    const double c = std::cos(th), s = std::sin(th);
    EmbeddingJet j;
    j.point = v2(radius * c, radius * s);
    j.first[0] = v2(-radius * th1 * s, radius * th1 * c);
    j.second[0][0] = v2(-radius * th2 * s - radius * th1 * th1 * c, radius * th2 * c - radius * th1 * th1 * s);
    return j;
  });
}

// Star-shaped curve with polar radius rho(t) = a0 + sum_k (cos_k cos kt + sin_k sin kt).
Chart generic_closed_curve(const PresetParams& p) {
  const double a0 = scalar(p, "a0", 1.0);
  const std::vector<double> cs = list(p, "cos", {0.3});
  const std::vector<double> sn = list(p, "sin", {0.0, 0.12});
  auto radius = [a0, cs, sn](double t, int deriv) {
    double r = deriv == 0 ? a0 : 0.0;
    const std::size_t kmax = std::max(cs.size(), sn.size());
    for (std::size_t i = 0; i < kmax; ++i) {
      const double k = static_cast<double>(i + 1);
      const double a = i < cs.size() ? cs[i] : 0.0;
      const double b = i < sn.size() ? sn[i] : 0.0;
      const double c = std::cos(k * t), s = std::sin(k * t);
      switch (deriv) {
        case 0: r += a * c + b * s; break;
        case 1: r += k * (-a * s + b * c); break;
        default: r += -k * k * (a * c + b * s); break;
      }
    }
    return r;
  };
  for (int i = 0; i < 2048; ++i)
    require(radius(kTwoPi * i / 2048.0, 0) > 0.0, "generic_closed_curve radius must stay positive");
  return make_curve("generic_closed_curve", {0.0, kTwoPi, true}, [radius](double t) {
    const double r = radius(t, 0), r1 = radius(t, 1), r2 = radius(t, 2);
    const double c = std::cos(t), s = std::sin(t);
    EmbeddingJet j;
    j.point = v2(r * c, r * s);
    j.first[0] = v2(r1 * c - r * s, r1 * s + r * c);
    j.second[0][0] = v2(r2 * c - 2.0 * r1 * s - r * c, r2 * s + 2.0 * r1 * c - r * s);
    return j;
  });
}

// Open parabolic arc y = curvature/2 * t^2 on [-half_width, half_width];
// curvature profile kappa(t) = k0 / (1 + k0^2 t^2)^{3/2}.
Chart arc(const PresetParams& p) {
  const double k0 = scalar(p, "curvature", 1.0);
  const double a = scalar(p, "half_width", 1.0);
  require(a > 0, "arc half_width must be positive");
  return make_curve("arc", {-a, a, false}, [k0](double t) {
    EmbeddingJet j;
    j.point = v2(t, 0.5 * k0 * t * t);
    j.first[0] = v2(1.0, k0 * t);
    j.second[0][0] = v2(0.0, k0);
    return j;
  });
}

Chart torus(const PresetParams& p) {
  const double big = scalar(p, "R", 2.0);
  const double small = scalar(p, "r", 1.0);
  require(small > 0 && small < big, "torus needs 0 < r < R");
  auto jet = [big, small](const SurfVec& q) {
    const double ct = std::cos(q(0)), st = std::sin(q(0));
    const double cp = std::cos(q(1)), sp = std::sin(q(1));
    const double w = big + small * ct;
    EmbeddingJet j;
    j.point = v3(w * cp, w * sp, small * st);
    j.first[0] = v3(-small * st * cp, -small * st * sp, small * ct);
    j.first[1] = v3(-w * sp, w * cp, 0.0);
    j.second[0][0] = v3(-small * ct * cp, -small * ct * sp, -small * st);
    j.second[0][1] = v3(small * st * sp, -small * st * cp, 0.0);
    j.second[1][0] = j.second[0][1];
    j.second[1][1] = v3(-w * cp, -w * sp, 0.0);
    return j;
  };
  return Chart("torus", 3, {{0.0, kTwoPi, true}, {0.0, kTwoPi, true}},
               [jet](const SurfVec& q) { return jet(q).point; }, jet, 1.0);
}

Chart cylinder_band(const PresetParams& p) {
  const double radius = scalar(p, "R", 1.0);
  const double height = scalar(p, "H", 1.0);
  require(radius > 0 && height > 0, "cylinder_band needs R > 0 and H > 0");
  auto jet = [radius](const SurfVec& q) {
    const double c = std::cos(q(0)), s = std::sin(q(0));
    EmbeddingJet j;
    j.point = v3(radius * c, radius * s, q(1));
    j.first[0] = v3(-radius * s, radius * c, 0.0);
    j.first[1] = v3(0.0, 0.0, 1.0);
    j.second[0][0] = v3(-radius * c, -radius * s, 0.0);
    j.second[0][1] = v3(0.0, 0.0, 0.0);
    j.second[1][0] = j.second[0][1];
    j.second[1][1] = v3(0.0, 0.0, 0.0);
    return j;
  };
  return Chart("cylinder_band", 3, {{0.0, kTwoPi, true}, {0.0, height, false}},
               [jet](const SurfVec& q) { return jet(q).point; }, jet, -1.0);
}

Chart spherical_band(const PresetParams& p) {
  const double radius = scalar(p, "R", 1.0);
  const double lo = scalar(p, "theta_min", std::numbers::pi / 4);
  const double hi = scalar(p, "theta_max", 3 * std::numbers::pi / 4);
  require(radius > 0, "spherical_band radius must be positive");
  require(0 < lo && lo < hi && hi < std::numbers::pi, "spherical_band needs 0 < theta_min < theta_max < pi");
  auto jet = [radius](const SurfVec& q) {
    const double ct = std::cos(q(0)), st = std::sin(q(0));
    const double cp = std::cos(q(1)), sp = std::sin(q(1));
    EmbeddingJet j;
    j.point = v3(radius * st * cp, radius * st * sp, radius * ct);
    j.first[0] = v3(radius * ct * cp, radius * ct * sp, -radius * st);
    j.first[1] = v3(-radius * st * sp, radius * st * cp, 0.0);
    j.second[0][0] = v3(-radius * st * cp, -radius * st * sp, -radius * ct);
    j.second[0][1] = v3(-radius * ct * sp, radius * ct * cp, 0.0);
    j.second[1][0] = j.second[0][1];
    j.second[1][1] = v3(-radius * st * cp, -radius * st * sp, 0.0);
    return j;
  };
  return Chart("spherical_band", 3, {{lo, hi, false}, {0.0, kTwoPi, true}},
               [jet](const SurfVec& q) { return jet(q).point; }, jet, -1.0);
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"segment", "circle", "generic_closed_curve", "arc", "torus", "cylinder_band", "spherical_band"};
}

std::vector<std::string> preset_parameter_keys(std::string_view name) {
  if (name == "segment") return {"L"};
  if (name == "circle") return {"R", "warp"};
  if (name == "generic_closed_curve") return {"a0", "cos", "sin"};
  if (name == "arc") return {"curvature", "half_width"};
  if (name == "torus") return {"R", "r"};
  if (name == "cylinder_band") return {"R", "H"};
  if (name == "spherical_band") return {"R", "theta_min", "theta_max"};
  throw Error(ErrorCode::UnknownPreset, std::string(name));
}

Chart preset_chart(std::string_view name, const PresetParams& params) {
  const auto keys = preset_parameter_keys(name);
  for (const auto& [key, value] : params) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw Error(ErrorCode::InvalidParams, fmt::format("preset '{}' has no parameter '{}'", name, key));
  }
  if (name == "segment") return segment(params);
  if (name == "circle") return circle(params);
  if (name == "generic_closed_curve") return generic_closed_curve(params);
  if (name == "arc") return arc(params);
  if (name == "torus") return torus(params);
  if (name == "cylinder_band") return cylinder_band(params);
  return spherical_band(params);
}

}  // namespace thinlayer
