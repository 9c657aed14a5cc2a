#pragma once

#include <cmath>

#include "error.hpp"

namespace cpcal {

enum class GeometryKind { sphere_plane, cylinder_plane, parallel_planes };

// Two-body configuration. Only the fields relevant to `kind` are read:
// cylinder-plane uses a, L, L_eff; sphere-plane uses R; parallel planes use S.
// L_eff is the effective exposure length (the minimum of cantilever width and
// cylinder length) and must not exceed L.
struct Geometry {
  GeometryKind kind = GeometryKind::cylinder_plane;
  double a = 0;      // cylinder radius [m]
  double L = 0;      // cylinder length [m]
  double L_eff = 0;  // effective exposure length [m]
  double R = 0;      // sphere radius [m]
  double S = 0;      // plate area [m^2]

  void validate() const {
    switch (kind) {
      case GeometryKind::cylinder_plane:
        require(a > 0 && L > 0 && L_eff > 0, ErrorClass::invalid_argument,
                "cylinder-plane geometry requires a, L, L_eff > 0");
        require(L_eff <= L, ErrorClass::invalid_argument, "L_eff must not exceed L");
        break;
      case GeometryKind::sphere_plane:
        require(R > 0, ErrorClass::invalid_argument, "sphere-plane geometry requires R > 0");
        break;
      case GeometryKind::parallel_planes:
        require(S > 0, ErrorClass::invalid_argument, "parallel-plane geometry requires S > 0");
        break;
    }
  }
};

struct Resonator {
  double m_eff = 0;  // effective mass [kg]
  double nu0 = 0;    // unperturbed resonance frequency [Hz]

  void validate() const {
    require(m_eff > 0, ErrorClass::invalid_argument, "resonator m_eff must be > 0");
    require(nu0 > 0, ErrorClass::invalid_argument, "resonator nu0 must be > 0");
  }
};

enum class DeformationKind { flat_facet, triangular_tip };

// Axis-uniform deformation of the cylinder surface: a flat facet of full
// width 2b, or a triangular tip of width 2b and height b_prime. b << a is
// assumed (not enforced).
struct Deformation {
  DeformationKind kind = DeformationKind::flat_facet;
  double b = 0;        // half-width [m]
  double b_prime = 0;  // tip height [m], triangular_tip only

  void validate() const {
    require(b > 0, ErrorClass::invalid_argument, "deformation half-width b must be > 0");
    if (kind == DeformationKind::triangular_tip)
      require(b_prime > 0, ErrorClass::invalid_argument, "tip height b_prime must be > 0");
  }
};

// Nonparallelism parameter of Eq.-style tilt corrections: alpha = L sin(theta)/(2d).
inline double tilt_alpha(double L, double theta, double d) {
  require(d > 0, ErrorClass::domain, "tilt_alpha requires d > 0");
  return L * std::sin(theta) / (2.0 * d);
}

}  // namespace cpcal
