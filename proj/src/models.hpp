#pragma once

#include "geometry.hpp"

// Closed-form electrostatic and Casimir models for the cylinder-plane
// calibration geometry plus the sphere-plane / parallel-plane reference
// configurations.
//
// Conventions:
//  - forces are returned as positive magnitudes of attraction [N];
//  - frequency shifts are signed, negative for an attractive force gradient;
//  - d is always the closest surface-surface gap [m].
//
// Length bookkeeping: the idealized full-cylinder Coulomb formulas
// (coulomb_force_cylinder_exact / coulomb_force_cylinder_pfa) use L, the
// experiment-facing quantities (frequency shift, capacitance, curvature
// coefficient) use L_eff, and the tabulated-force dispatchers
// (casimir_force_ideal / coulomb_force_pfa) use L_eff for the cylinder;
// the source text leaves the last choice open, so it is pinned here.
namespace cpcal::models {

// Exact two-dimensional Coulomb force for an infinite cylinder parallel to a
// plane: F = 4 pi eps0 L V^2 / (Delta ln^2((h-Delta)/(h+Delta))), h = d + a,
// Delta = sqrt(h^2 - a^2). Evaluated in a cancellation-free arrangement.
// Valid input: cylinder-plane geometry, d > 0.
double coulomb_force_cylinder_exact(const Geometry& geom, double d, double V);

// Proximity-force approximation of the same force:
// F = pi eps0 sqrt(a) L V^2 / (2 sqrt(2) d^{3/2}), d > 0.
double coulomb_force_cylinder_pfa(const Geometry& geom, double d, double V);

// Nonparallelism correction factor for the PFA force:
// (1/alpha)(1/sqrt(1-alpha) - 1/sqrt(1+alpha)), |alpha| < 1.
// Equals 1 + (5/8) alpha^2 + O(alpha^4); the implementation uses an exact
// rationalized form that is cancellation-free down to alpha = 0.
double nonparallel_force_factor(double alpha);

// Tilt factor of the electrostatic frequency shift, normalized to 1 at
// alpha = 0: (1/(3 alpha))[(1-alpha)^{-3/2} - (1+alpha)^{-3/2}].
// Equals 1 + (35/24) alpha^2 + O(alpha^4).
double freq_shift_tilt_factor(double alpha);

// Capacitance tilt factor (sqrt(1+alpha) - sqrt(1-alpha))/alpha, normalized
// to 1 at alpha = 0. Equals 1 + alpha^2/8 + O(alpha^4); even in alpha.
double capacitance_tilt_factor(double alpha);

// Squared-frequency shift of the resonator under a bias V against minimizing
// potential V0, including the tilt factor:
// shift = -K_el(d) (V - V0)^2 * freq_shift_tilt_factor(alpha), always <= 0.
double electrostatic_freq_shift(const Geometry& geom, const Resonator& res, double d, double V,
                                double V0, double alpha);

// Cylinder-plane PFA capacitance 2 pi eps0 L_eff sqrt(a/(2d)) times the tilt
// factor. d > 0, |alpha| < 1.
double capacitance_cylinder_pfa(const Geometry& geom, double d, double alpha);

// Electrostatic curvature coefficient of the frequency-shift parabola:
// K_el = 3 eps0 sqrt(a) L_eff / (16 sqrt(2) pi m_eff d^{5/2})  [Hz^2/V^2].
double curvature_coefficient(const Geometry& geom, const Resonator& res, double d);

// Ideal zero-temperature Casimir force for the three reference geometries:
// sphere-plane (pi^3/360) hbar c R / d^3, cylinder-plane (PFA)
// (pi^3/(384 sqrt(2))) hbar c L_eff sqrt(a) / d^{7/2}, parallel planes
// (pi^2/240) hbar c S / d^4.
double casimir_force_ideal(const Geometry& geom, double d);

// PFA Coulomb force dispatcher for the same three geometries:
// sphere pi eps0 R V^2 / d, cylinder (pi eps0 / (2 sqrt(2))) L_eff sqrt(a)
// V^2 / d^{3/2}, parallel (eps0/2) S V^2 / d^2.
double coulomb_force_pfa(const Geometry& geom, double d, double V);

// Bias at which the PFA Coulomb force equals the ideal Casimir force:
// V_eq = sqrt(pi^2/xi) sqrt(hbar c / eps0) / d, with xi = 360 (sphere),
// 192 (cylinder), 120 (parallel planes). Substituting V_eq into
// coulomb_force_pfa reproduces casimir_force_ideal identically.
double equivalent_casimir_voltage(GeometryKind kind, double d);

}  // namespace cpcal::models
