#pragma once

#include "geometry.hpp"

// PFA frequency-shift models for a cylinder with a flat facet or a triangular
// tip, and extraction of the effective power-law exponent B of
// |shift| ~ 1/d^B over a gap range.
namespace cpcal::deformations {

// Contribution of the incomplete cylinder to the PFA profile integral:
//   x > 0:  sqrt(2a/x) arctan(sqrt(2ax)/b)
//   x < 0:  sqrt(2a/|x|) artanh(sqrt(2a|x|)/b), the analytic continuation of
//           the same integral, valid for |x| < b^2/(2a)
// with a convergent series bridge around x = 0 (the function is analytic
// there, value 2a/b). The negative branch is required by flat facets wider
// than sqrt(2ad), whose shifted argument d - b^2/(2a) is negative.
// Domain error at x <= -b^2/(2a).
double profile_f_inc(double x, double a, double b);

// Parallel-plate contribution of the flat facet: b/d, d > 0.
double profile_f_flat(double d, double b);

// Contribution of a triangular tip of width 2b and height b_prime:
// (b/b_prime) ln(1 + b_prime/d), d > 0.
double profile_f_tip(double d, double b, double b_prime);

// Squared-frequency shift of the deformed cylinder at gap d and bias
// dV = V - V0:
//   flat facet: shift = -P d^2/dd^2 [ f_inc(d - b^2/2a) + f_flat(d) ]
//   tip:        shift = -P d^2/dd^2 [ f_inc(d + b_prime) + f_tip(d) ]
// with P = eps0 L_eff dV^2 / (4 pi^2 m_eff). The f_flat/f_tip parts use
// analytic second derivatives; the f_inc part uses Richardson-extrapolated
// central differences with step 1e-4 d. Result <= 0.
double deformed_freq_shift(const Deformation& def, const Geometry& geom, const Resonator& res,
                           double d, double dV);

// Unweighted log-log linear fit of |shift| = A/d^B over n_points log-spaced
// gaps in [d_lo, d_hi]; returns B. n_points >= 3.
double deformation_exponent(const Deformation& def, const Geometry& geom, const Resonator& res,
                            double d_lo, double d_hi, int n_points = 50);

}  // namespace cpcal::deformations
