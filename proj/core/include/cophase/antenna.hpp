// SPDX-License-Identifier: Apache-2.0
//
// Synthetic spherical near-field scenario: tangential Hertzian dipoles on a
// source sphere radiate to multi-element probe arrays placed around
// reference positions on a larger measurement sphere. Lengths are in
// wavelengths (k = 2 pi) and the free-space impedance is normalized to one.
#pragma once

#include <vector>

#include <Eigen/Core>

#include "cophase/model.hpp"

namespace cophase {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;

/// N dipoles, two orthogonal tangential polarizations per location.
struct DipoleSourceSet {
  std::vector<Vec3> positions;
  std::vector<Vec3> polarizations;
  double diameter = 0.0;

  Index size() const noexcept { return static_cast<Index>(positions.size()); }
};

/// Probe element offsets in the local (u, v) tangent frame, in wavelengths.
struct ProbeArrayLayout {
  std::vector<Vec2> offsets;

  Index elements() const noexcept { return static_cast<Index>(offsets.size()); }

  /// {(0,0), (d,0), (0,d)}: two independent phase differences per location.
  static ProbeArrayLayout l_shape(double spacing = 1.0);
  /// {(0,0), (d,d)}: the two diagonal elements of the L.
  static ProbeArrayLayout diagonal(double spacing = 1.0);
};

struct MeasurementGrid {
  std::vector<Vec3> positions;
  /// Local tangent frame (theta-hat, phi-hat) at every reference position.
  std::vector<Vec3> tangent_u;
  std::vector<Vec3> tangent_v;
  double diameter = 0.0;

  Index size() const noexcept { return static_cast<Index>(positions.size()); }
};

/// Fibonacci-spiral points on a sphere of radius diameter/2 (north pole first).
std::vector<Vec3> fibonacci_sphere(Index count, double radius);

/// Spherical unit vectors (theta-hat, phi-hat) at a point.
std::pair<Vec3, Vec3> tangent_frame(const Vec3& point);

DipoleSourceSet build_source_sphere(double diameter, Index count);
MeasurementGrid build_measurement_grid(double diameter, Index count);

/// Electric field at `at` of a Hertzian dipole with moment `moment` at `from`,
/// including the 1/r, 1/r^2 and 1/r^3 terms (exp(+j w t) convention).
CVec3 dipole_field(const Vec3& from, const Vec3& moment, const Vec3& at);

/// Signal received by a dipole probe with polarization `probe_pol` at
/// `probe_pos` from a unit source dipole; symmetric in source and probe.
Complex dipole_coupling(const Vec3& source_pos, const Vec3& source_pol, const Vec3& probe_pos,
                        const Vec3& probe_pol);

/// Probe element positions for grid location m, block-major like the rows.
std::vector<Vec3> probe_positions(const MeasurementGrid& grid, const ProbeArrayLayout& probe);

/// Minimum source-probe distance accepted by build_dipole_operator.
inline constexpr double kMinSourceProbeDistance = 0.1;
/// Probe positions of different locations closer than this are a collision.
inline constexpr double kMinProbeSpacing = 1e-3;

/// Rows ordered so that element c at location m is row c*M + m, which makes
/// each location one coherent group. Probes are polarized along
/// (u + v)/sqrt(2) of the local tangent frame.
ForwardOperator build_dipole_operator(const DipoleSourceSet& sources, const MeasurementGrid& grid,
                                      const ProbeArrayLayout& probe);

}  // namespace cophase
