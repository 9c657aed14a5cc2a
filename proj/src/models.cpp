#include "models.hpp"

#include <cmath>

#include "constants.hpp"

namespace cpcal::models {

namespace {

using constants::c_light;
using constants::epsilon0;
using constants::hbar;
using constants::pi;

void check_gap(double d) { require(d > 0, ErrorClass::domain, "gap d must be > 0"); }

void check_alpha(double alpha) {
  require(std::abs(alpha) < 1.0, ErrorClass::domain, "tilt parameter |alpha| must be < 1");
}

void check_kind(const Geometry& geom, GeometryKind kind, const char* what) {
  require(geom.kind == kind, ErrorClass::invalid_argument, std::string(what) + ": wrong geometry kind");
}

}  // namespace

double coulomb_force_cylinder_exact(const Geometry& geom, double d, double V) {
  check_kind(geom, GeometryKind::cylinder_plane, "coulomb_force_cylinder_exact");
  geom.validate();
  check_gap(d);
  // Delta = sqrt(h^2 - a^2) without cancellation (h = d + a), and
  // ln((h-Delta)/(h+Delta)) = -2 ln((h+Delta)/a) = -2 log1p((d+Delta)/a)
  // since (h-Delta)(h+Delta) = a^2; log1p keeps full precision at small d/a.
  const double delta = std::sqrt(d * (2.0 * geom.a + d));
  const double log_term = -2.0 * std::log1p((d + delta) / geom.a);
  return 4.0 * pi * epsilon0 * geom.L * V * V / (delta * log_term * log_term);
}

double coulomb_force_cylinder_pfa(const Geometry& geom, double d, double V) {
  check_kind(geom, GeometryKind::cylinder_plane, "coulomb_force_cylinder_pfa");
  geom.validate();
  check_gap(d);
  return pi * epsilon0 * std::sqrt(geom.a) * geom.L * V * V /
         (2.0 * std::sqrt(2.0) * d * std::sqrt(d));
}

double nonparallel_force_factor(double alpha) {
  check_alpha(alpha);
  // (1/a)(1/sqrt(1-a) - 1/sqrt(1+a)) = 2 / ((sqrt(1+a)+sqrt(1-a)) sqrt(1-a^2)),
  // exact for all |a| < 1 and finite at a = 0.
  const double x = std::sqrt(1.0 + alpha);
  const double y = std::sqrt(1.0 - alpha);
  return 2.0 / ((x + y) * (x * y));  // grouping keeps the result exactly even in alpha
}

double freq_shift_tilt_factor(double alpha) {
  check_alpha(alpha);
  // (1/(3a))[(1-a)^{-3/2} - (1+a)^{-3/2}]
  //   = (2/3) (x^2 + xy + y^2) / ((x + y) (xy)^3),  x = sqrt(1+a), y = sqrt(1-a).
  const double x = std::sqrt(1.0 + alpha);
  const double y = std::sqrt(1.0 - alpha);
  const double xy = x * y;
  return 2.0 / 3.0 * ((x * x + y * y) + xy) / ((x + y) * (xy * xy * xy));
}

double capacitance_tilt_factor(double alpha) {
  check_alpha(alpha);
  // (sqrt(1+a) - sqrt(1-a))/a = 2 / (sqrt(1+a) + sqrt(1-a)).
  return 2.0 / (std::sqrt(1.0 + alpha) + std::sqrt(1.0 - alpha));
}

double electrostatic_freq_shift(const Geometry& geom, const Resonator& res, double d, double V,
                                double V0, double alpha) {
  const double dv = V - V0;
  return -curvature_coefficient(geom, res, d) * dv * dv * freq_shift_tilt_factor(alpha);
}

double capacitance_cylinder_pfa(const Geometry& geom, double d, double alpha) {
  check_kind(geom, GeometryKind::cylinder_plane, "capacitance_cylinder_pfa");
  geom.validate();
  check_gap(d);
  return 2.0 * pi * epsilon0 * geom.L_eff * std::sqrt(geom.a / (2.0 * d)) *
         capacitance_tilt_factor(alpha);
}

double curvature_coefficient(const Geometry& geom, const Resonator& res, double d) {
  check_kind(geom, GeometryKind::cylinder_plane, "curvature_coefficient");
  geom.validate();
  res.validate();
  check_gap(d);
  return 3.0 * epsilon0 * std::sqrt(geom.a) * geom.L_eff /
         (16.0 * std::sqrt(2.0) * pi * res.m_eff * d * d * std::sqrt(d));
}

double casimir_force_ideal(const Geometry& geom, double d) {
  geom.validate();
  check_gap(d);
  switch (geom.kind) {
    case GeometryKind::sphere_plane:
      return pi * pi * pi / 360.0 * hbar * c_light * geom.R / (d * d * d);
    case GeometryKind::cylinder_plane:
      return pi * pi * pi / (384.0 * std::sqrt(2.0)) * hbar * c_light * geom.L_eff *
             std::sqrt(geom.a) / (d * d * d * std::sqrt(d));
    case GeometryKind::parallel_planes:
      return pi * pi / 240.0 * hbar * c_light * geom.S / (d * d * d * d);
  }
  throw Error(ErrorClass::invalid_argument, "casimir_force_ideal: unknown geometry kind");
}

double coulomb_force_pfa(const Geometry& geom, double d, double V) {
  geom.validate();
  check_gap(d);
  switch (geom.kind) {
    case GeometryKind::sphere_plane:
      return pi * epsilon0 * geom.R * V * V / d;
    case GeometryKind::cylinder_plane:
      return pi * epsilon0 / (2.0 * std::sqrt(2.0)) * geom.L_eff * std::sqrt(geom.a) * V * V /
             (d * std::sqrt(d));
    case GeometryKind::parallel_planes:
      return epsilon0 / 2.0 * geom.S * V * V / (d * d);
  }
  throw Error(ErrorClass::invalid_argument, "coulomb_force_pfa: unknown geometry kind");
}

double equivalent_casimir_voltage(GeometryKind kind, double d) {
  check_gap(d);
  double xi = 0;
  switch (kind) {
    case GeometryKind::sphere_plane:
      xi = 360.0;
      break;
    case GeometryKind::cylinder_plane:
      xi = 192.0;
      break;
    case GeometryKind::parallel_planes:
      xi = 120.0;
      break;
  }
  return std::sqrt(pi * pi / xi) * std::sqrt(hbar * c_light / epsilon0) / d;
}

}  // namespace cpcal::models
