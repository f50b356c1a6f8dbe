#pragma once

#include <array>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "thinlayer/grid.hpp"
#include "thinlayer/types.hpp"

namespace thinlayer {

inline constexpr double kDetTol = 1e-10;
inline constexpr double kPeriodTol = 1e-8;

struct ParameterRange {
  double lo = 0.0;
  double hi = 1.0;
  bool periodic = false;
};

/// Embedding value with first and second parameter derivatives.
struct EmbeddingJet {
  AmbientVec point;
  std::array<AmbientVec, 2> first;
  std::array<std::array<AmbientVec, 2>, 2> second;
};

/// Single-patch parametrization X of a hypersurface in R^2 or R^3.
///
/// Non-periodic coordinates carry Dirichlet conditions at both ends. When no
/// analytic jet is supplied, derivatives come from 4th-order central
/// differences with step 1e-4 times the coordinate length; the map is then
/// evaluated slightly outside the rectangle and must extend smoothly there.
///
/// The unit normal is `orientation` times the left normal of X' (curves) or
/// the normalized X_1 x X_2 (surfaces). Presets choose the orientation that
/// points toward the centre of curvature of convex pieces, so a circle of
/// radius R has curvature +1/R.
class Chart {
 public:
  using PointMap = std::function<AmbientVec(const SurfVec&)>;
  using JetMap = std::function<EmbeddingJet(const SurfVec&)>;

  Chart(std::string name, int ambient_dimension, std::vector<ParameterRange> rectangle,
        PointMap embedding, JetMap jet = {}, double orientation = 1.0);

  const std::string& name() const { return name_; }
  int ambient_dimension() const { return ambient_dim_; }
  int surface_dimension() const { return ambient_dim_ - 1; }
  const std::vector<ParameterRange>& rectangle() const { return rectangle_; }
  const ParameterRange& range(int mu) const { return rectangle_[static_cast<std::size_t>(mu)]; }
  double orientation() const { return orientation_; }
  bool has_analytic_derivatives() const { return static_cast<bool>(jet_); }

  /// Maps periodic coordinates back into their range; rejects points outside
  /// the rectangle in Dirichlet coordinates.
  SurfVec canonical(const SurfVec& p) const;

  AmbientVec embed(const SurfVec& p) const;
  EmbeddingJet jet(const SurfVec& p) const;
  /// 4th-order central-difference jet with an explicit step per coordinate.
  EmbeddingJet finite_difference_jet(const SurfVec& p, const SurfVec& step) const;
  double default_fd_step(int mu) const { return 1e-4 * (range(mu).hi - range(mu).lo); }

 private:
  std::string name_;
  int ambient_dim_;
  std::vector<ParameterRange> rectangle_;
  PointMap embedding_;
  JetMap jet_;
  double orientation_;
};

struct FirstFundamental {
  SurfMat g;
  SurfMat g_inverse;
  double det_g = 0.0;
};

struct WeingartenData {
  AmbientVec normal;
  SurfMat second_fundamental;  // h_{mu nu}
  SurfMat weingarten;          // L^mu_nu = g^{mu rho} h_{rho nu}
  SurfVec curvatures;          // ascending
  SurfVec invariants;          // K_1 .. K_{d-1}
};

struct EffectivePotential {
  double from_curvatures = 0.0;
  double from_invariants = 0.0;
  double value() const { return from_curvatures; }
};

FirstFundamental evaluate_first_fundamental(const Chart& chart, const SurfVec& node);
WeingartenData evaluate_weingarten(const Chart& chart, const SurfVec& node);

/// Binomially normalized elementary symmetric sums of the curvatures.
SurfVec curvature_invariants(const SurfVec& curvatures);
/// V_eff = -1/2 sum k^2 + 1/4 (sum k)^2, evaluated in both the curvature and
/// the invariant form.
EffectivePotential effective_potential(const SurfVec& curvatures);

struct NodeGeometry {
  SurfVec parameter;
  AmbientVec position;
  AmbientVec normal;
  SurfMat g;
  SurfMat g_inverse;
  double det_g = 0.0;
  double sqrt_det_g = 0.0;
  SurfMat second_fundamental;
  SurfMat weingarten;
  SurfVec curvatures;
  SurfVec invariants;
  double v_eff = 0.0;
  SurfVec grad_curvature_norm;  // |grad_g kappa_mu|_g
  SurfVec laplace_curvature;    // Delta_g kappa_mu
};

/// Geometry sampled at every node (boundary nodes included) of a surface grid.
struct GeometryFields {
  Grid grid;
  std::vector<NodeGeometry> nodes;
  int ambient_dimension = 2;
};

GeometryFields evaluate_geometry(const Chart& chart, const Grid& surface_grid);

struct CurvatureBounds {
  /// 1 / max |kappa|; +infinity for a flat hypersurface.
  double rho_m = std::numeric_limits<double>::infinity();
  double max_abs_curvature = 0.0;
  double max_grad_curvature = 0.0;
  double max_laplace_curvature = 0.0;
  bool flat() const { return max_abs_curvature == 0.0; }
};

CurvatureBounds curvature_bounds(const GeometryFields& fields);

using PresetParams = std::map<std::string, std::vector<double>, std::less<>>;

/// Known preset names: segment, circle, generic_closed_curve, arc, torus,
/// cylinder_band, spherical_band.
Chart preset_chart(std::string_view name, const PresetParams& params = {});
std::vector<std::string> preset_names();
/// Parameter keys accepted by a preset (for config validation).
std::vector<std::string> preset_parameter_keys(std::string_view name);

/// Geometry dump, one row per node.
void write_geometry_csv(const GeometryFields& fields, std::ostream& out);

}  // namespace thinlayer
