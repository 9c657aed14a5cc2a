#pragma once

#include <cstdint>
#include <vector>

#include "dataset.hpp"
#include "geometry.hpp"

// Synthetic calibration-data generator: piezo-to-gap mapping, pure-Coulomb
// and power-law extra-force frequency-shift scenarios, distance-dependent
// minimizing-potential profiles, and seeded noise/drift models. With all
// noise amplitudes zero the generator evaluates the scenario model exactly.
namespace cpcal::synth {

// Linear piezo actuation: gap d = beta * (V0_PZT - V_PZT).
struct PiezoMap {
  double beta = 0;    // actuation coefficient [m/V]
  double v0_pzt = 0;  // contact voltage [V]
  void validate() const;
};

// Gap for a piezo setting; contact error when V_PZT >= V0_PZT.
double piezo_to_gap(const PiezoMap& map, double v_pzt);
// Inverse mapping, d > 0; round-trips with piezo_to_gap exactly.
double gap_to_piezo(const PiezoMap& map, double d);

// Squared-frequency shift of the power-law scenario:
// -(alpha1/d^2.5 + alpha2/d^p) (V - V0)^2, with p > 2.5 and alphas >= 0.
double hypothetical_shift(double alpha1, double alpha2, double p, double d, double dv);

// Gap at which the two power-law terms are equal: (alpha2/alpha1)^{1/(p-2.5)}.
double crossover_gap(double alpha1, double alpha2, double p);

enum class ForceModelKind { pure_coulomb, extra_power };

struct ForceModel {
  ForceModelKind kind = ForceModelKind::pure_coulomb;
  // extra_power parameters; alpha1 [Hz^2 m^2.5 / V^2], alpha2 [Hz^2 m^p / V^2]
  double alpha1 = 0;
  double alpha2 = 0;
  double p = 0;
  static ForceModel pure_coulomb();
  static ForceModel extra_power(double alpha1, double alpha2, double p);
  void validate() const;
};

enum class V0ProfileKind { constant, linear, saturating };

// Distance dependence of the minimizing potential V0.
struct V0Profile {
  V0ProfileKind kind = V0ProfileKind::constant;
  double v0 = 0;       // constant
  double v0_far = 0;   // linear intercept / saturating large-gap level [V]
  double slope = 0;    // linear coefficient [V/m]
  double v0_near = 0;  // saturating small-gap level [V]
  double d_knee = 0;   // saturating knee gap [m]
  static V0Profile constant(double v0);
  // v0_far + slope * d
  static V0Profile linear(double v0_far, double slope);
  // v0_near + (v0_far - v0_near) * d / (d + d_knee): flat near contact,
  // monotone in d, bounded between the two levels.
  static V0Profile saturating(double v0_far, double v0_near, double d_knee);
  double value(double d) const;
  void validate() const;
};

struct NoiseModel {
  double sigma_nu = 0;        // per-point Gaussian frequency noise floor [Hz]
  double sigma_nu_rel = 0;    // opt-in signal-proportional noise: adds
                              // sigma_nu_rel * |shift| / (2 nu) in quadrature,
                              // i.e. a fixed relative error on the nu^2 shift
  double kel_drift_frac = 0;  // slow multiplicative drift of the shift term
  double v0_sigma = 0;        // Gaussian jitter of V0, drawn once per distance [V]
  std::uint64_t seed = 0;     // identical seed => identical dataset
  double nu0_ramp = 0;        // opt-in linear baseline ramp across a run [Hz]
  void validate() const;
};

struct Scenario {
  Geometry geom;     // cylinder-plane, used by the pure-Coulomb model
  Resonator res;
  ForceModel force;
  V0Profile v0;
  NoiseModel noise;
  void validate() const;
};

// Noise-free squared-frequency shift of the scenario at gap d and bias
// offset dv = V - V0(d).
double scenario_shift(const Scenario& sc, double d, double dv);

// Full calibration protocol: for each V_PZT (outer, in list order) sweep all
// biases (inner). Per distance one V0-jitter deviate is drawn, then one
// frequency deviate per point; the drift sinusoid completes one cycle over
// the run and the baseline ramp is linear in the point index. Timestamps are
// consecutive ordinals from 0.
std::vector<CalibrationPoint> generate_calibration_run(const Scenario& sc, const PiezoMap& map,
                                                       const std::vector<double>& v_pzt_grid,
                                                       const std::vector<double>& v_bias_grid,
                                                       std::int64_t run_id = 0);

// Constant-bias approach: one point per V_PZT value.
std::vector<CalibrationPoint> generate_fast_approach_run(const Scenario& sc, const PiezoMap& map,
                                                         const std::vector<double>& v_pzt_grid,
                                                         double v_bias, std::int64_t run_id = 0);

// Noise-free curvature samples K(d) evaluated directly from the scenario's
// curvature law on a gap grid, tagged with sigma_k = sigma_rel * K. For
// scans spanning gaps where raw-frequency synthesis would drive nu^2
// negative, this is the well-defined way to exercise the curvature fits.
std::vector<CurvatureSample> generate_curvature_pseudodata(const Scenario& sc, const PiezoMap& map,
                                                           const std::vector<double>& gap_grid,
                                                           double sigma_rel);

// n logarithmically spaced values from lo to hi inclusive (lo, hi > 0, n >= 2).
std::vector<double> log_spaced(double lo, double hi, std::size_t n);

}  // namespace cpcal::synth
