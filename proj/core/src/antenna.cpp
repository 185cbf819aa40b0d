// SPDX-License-Identifier: Apache-2.0
#include "cophase/antenna.hpp"

#include <cmath>
#include <numbers>

namespace cophase {

namespace {

constexpr double kWaveNumber = 2.0 * std::numbers::pi;

}  // namespace

ProbeArrayLayout ProbeArrayLayout::l_shape(double spacing) {
  return ProbeArrayLayout{{Vec2(0.0, 0.0), Vec2(spacing, 0.0), Vec2(0.0, spacing)}};
}

ProbeArrayLayout ProbeArrayLayout::diagonal(double spacing) {
  return ProbeArrayLayout{{Vec2(0.0, 0.0), Vec2(spacing, spacing)}};
}

std::vector<Vec3> fibonacci_sphere(Index count, double radius) {
  std::vector<Vec3> points;
  points.reserve(static_cast<std::size_t>(count));
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (Index i = 0; i < count; ++i) {
    const double z = count == 1 ? 1.0 : 1.0 - 2.0 * static_cast<double>(i) / static_cast<double>(count - 1);
    const double ring = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    points.emplace_back(radius * ring * std::cos(phi), radius * ring * std::sin(phi), radius * z);
  }
  return points;
}

std::pair<Vec3, Vec3> tangent_frame(const Vec3& point) {
  const double r = point.norm();
  const double theta = std::acos(std::clamp(point.z() / r, -1.0, 1.0));
  // phi is arbitrary on the poles; atan2(0, 0) = 0 gives a valid frame.
  const double phi = std::atan2(point.y(), point.x());
  const Vec3 theta_hat(std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi), -std::sin(theta));
  const Vec3 phi_hat(-std::sin(phi), std::cos(phi), 0.0);
  return {theta_hat, phi_hat};
}

DipoleSourceSet build_source_sphere(double diameter, Index count) {
  if (count < 2 || count % 2 != 0) throw InvalidArgument("dipole count must be even and positive");
  if (!(diameter > 0.0)) throw InvalidArgument("source sphere diameter must be positive");
  DipoleSourceSet set;
  set.diameter = diameter;
  for (const Vec3& p : fibonacci_sphere(count / 2, diameter / 2.0)) {
    const auto [u, v] = tangent_frame(p);
    set.positions.push_back(p);
    set.polarizations.push_back(u);
    set.positions.push_back(p);
    set.polarizations.push_back(v);
  }
  return set;
}

MeasurementGrid build_measurement_grid(double diameter, Index count) {
  if (count < 1) throw InvalidArgument("measurement grid needs at least one position");
  if (!(diameter > 0.0)) throw InvalidArgument("measurement sphere diameter must be positive");
  MeasurementGrid grid;
  grid.diameter = diameter;
  grid.positions = fibonacci_sphere(count, diameter / 2.0);
  for (const Vec3& p : grid.positions) {
    const auto [u, v] = tangent_frame(p);
    grid.tangent_u.push_back(u);
    grid.tangent_v.push_back(v);
  }
  return grid;
}

CVec3 dipole_field(const Vec3& from, const Vec3& moment, const Vec3& at) {
  const Vec3 d = at - from;
  const double r = d.norm();
  if (!(r > 0.0)) throw InvalidArgument("field point coincides with the dipole");
  const Vec3 rhat = d / r;
  const Complex j(0.0, 1.0);
  const Complex green = std::exp(-j * kWaveNumber * r) / (4.0 * std::numbers::pi);
  const double k = kWaveNumber;
  // far: k^2/r (rhat x p) x rhat; near: (1/r^3 + jk/r^2)(3 rhat (rhat.p) - p)
  const Vec3 transverse = rhat.cross(moment).cross(rhat);
  const Vec3 quasi_static = 3.0 * rhat * rhat.dot(moment) - moment;
  const Complex near = 1.0 / (r * r * r) + j * k / (r * r);
  return green * ((k * k / r) * transverse.cast<Complex>() + near * quasi_static.cast<Complex>());
}

Complex dipole_coupling(const Vec3& source_pos, const Vec3& source_pol, const Vec3& probe_pos,
                        const Vec3& probe_pol) {
  return probe_pol.cast<Complex>().dot(dipole_field(source_pos, source_pol, probe_pos));
}

std::vector<Vec3> probe_positions(const MeasurementGrid& grid, const ProbeArrayLayout& probe) {
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(grid.size() * probe.elements()));
  for (Index c = 0; c < probe.elements(); ++c) {
    const Vec2& o = probe.offsets[static_cast<std::size_t>(c)];
    for (Index m = 0; m < grid.size(); ++m) {
      const auto idx = static_cast<std::size_t>(m);
      out.push_back(grid.positions[idx] + o.x() * grid.tangent_u[idx] + o.y() * grid.tangent_v[idx]);
    }
  }
  return out;
}

ForwardOperator build_dipole_operator(const DipoleSourceSet& sources, const MeasurementGrid& grid,
                                      const ProbeArrayLayout& probe) {
  if (probe.elements() < 1) throw InvalidArgument("probe array has no elements");
  const CoherenceLayout layout(grid.size(), probe.elements());
  const std::vector<Vec3> probes = probe_positions(grid, probe);

  for (std::size_t i = 0; i < probes.size(); ++i) {
    for (std::size_t k = i + 1; k < probes.size(); ++k) {
      if ((probes[i] - probes[k]).norm() < kMinProbeSpacing) {
        throw InvalidArgument("probe positions " + std::to_string(i) + " and " + std::to_string(k) + " coincide");
      }
    }
  }

  CMatrix a(layout.observations(), sources.size());
  for (Index row = 0; row < layout.observations(); ++row) {
    const auto m = static_cast<std::size_t>(layout.group_of(row));
    const Vec3 pol = (grid.tangent_u[m] + grid.tangent_v[m]).normalized();
    const Vec3& at = probes[static_cast<std::size_t>(row)];
    for (Index k = 0; k < sources.size(); ++k) {
      const auto s = static_cast<std::size_t>(k);
      if ((at - sources.positions[s]).norm() <= kMinSourceProbeDistance) {
        throw InvalidArgument("source " + std::to_string(k) + " collides with probe row " + std::to_string(row));
      }
      a(row, k) = dipole_coupling(sources.positions[s], sources.polarizations[s], at, pol);
    }
  }
  return ForwardOperator(std::move(a), layout);
}

}  // namespace cophase
