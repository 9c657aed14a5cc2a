#pragma once

#include <string>
#include <utility>
#include <vector>

#include "geometry.hpp"

// Electrostatic patch-potential interaction over a power spectral density
// S(k): plane-plane energy per unit area and cylinder-plane PFA force, with
// the large/small-patch limits. Amplitudes carry units V^2 m^2 so that
// v_rms^2 = integral k S(k) dk comes out in V^2.
namespace cpcal::patches {

enum class SpectrumKind { flat_band, gaussian_band, tabulated };

struct PatchSpectrum {
  SpectrumKind kind = SpectrumKind::flat_band;
  double k_min = 0;      // support lower edge [1/m]
  double k_max = 0;      // support upper edge [1/m]
  double amplitude = 0;  // band amplitude [V^2 m^2]
  std::vector<std::pair<double, double>> table;  // (k [1/m], S [V^2 m^2]), tabulated kind

  // S(k) = amplitude on [k_min, k_max], 0 outside.
  static PatchSpectrum make_flat_band(double k_min, double k_max, double amplitude);
  // S(k) = amplitude exp(-(k-kc)^2/(2 sigma^2)) on [k_min, k_max] with
  // kc = (k_min+k_max)/2 and sigma = (k_max-k_min)/6 (window covers +-3 sigma).
  static PatchSpectrum make_gaussian_band(double k_min, double k_max, double amplitude);
  // Piecewise-linear interpolation of (k, S) rows, 0 outside the table range.
  static PatchSpectrum make_tabulated(std::vector<std::pair<double, double>> rows);
  // Two-column numeric text file (k, S), '#' comment lines allowed.
  static PatchSpectrum load(const std::string& path);

  double value(double k) const;
  void validate() const;
};

// sqrt(integral_0^inf k S(k) dk): closed form for flat bands, adaptive
// quadrature otherwise.
double v_rms(const PatchSpectrum& spec);

// Plane-plane patch interaction energy per unit area:
// (eps0/2) integral k^2 e^{-kd}/sinh(kd) S(k) dk, d > 0.
double patch_energy_pp(const PatchSpectrum& spec, double d);

// Cylinder-plane PFA patch force:
// (pi eps0 L / (2 sqrt 2)) a sqrt(d/a) integral k^3 e^{-2kd}/sinh^2(kd) S(k) dk.
// Independent of the applied bias; valid for d/a << 1.
double patch_force_cp(const PatchSpectrum& spec, const Geometry& geom, double d);

// Large-patch (k d -> 0) closed form (pi eps0 L / (2 sqrt 2)) sqrt(a)
// v_rms^2 / d^{3/2}: the cylinder PFA Coulomb force with V replaced by v_rms.
double patch_force_cp_large_limit(const Geometry& geom, double d, double v_rms);

}  // namespace cpcal::patches
