#include "synth.hpp"

#include <cmath>

#include "constants.hpp"
#include "error.hpp"
#include "models.hpp"
#include "rng.hpp"

namespace cpcal::synth {

void PiezoMap::validate() const {
  require(std::isfinite(beta) && beta > 0.0, ErrorClass::invalid_argument,
          "piezo actuation coefficient must be > 0");
  require(std::isfinite(v0_pzt), ErrorClass::invalid_argument,
          "piezo contact voltage must be finite");
}

double piezo_to_gap(const PiezoMap& map, double v_pzt) {
  map.validate();
  require(v_pzt < map.v0_pzt, ErrorClass::contact,
          "piezo voltage at or beyond contact (V_PZT >= V0_PZT)");
  return map.beta * (map.v0_pzt - v_pzt);
}

double gap_to_piezo(const PiezoMap& map, double d) {
  map.validate();
  require(d > 0.0 && std::isfinite(d), ErrorClass::domain, "gap must be > 0");
  return map.v0_pzt - d / map.beta;
}

double hypothetical_shift(double alpha1, double alpha2, double p, double d, double dv) {
  require(d > 0.0 && std::isfinite(d), ErrorClass::domain, "gap must be > 0");
  require(p > 2.5, ErrorClass::domain, "extra-force exponent must exceed 2.5");
  require(alpha1 >= 0.0 && alpha2 >= 0.0, ErrorClass::invalid_argument,
          "power-law amplitudes must be >= 0");
  return -(alpha1 / std::pow(d, 2.5) + alpha2 / std::pow(d, p)) * dv * dv;
}

double crossover_gap(double alpha1, double alpha2, double p) {
  require(alpha1 > 0.0 && alpha2 > 0.0, ErrorClass::domain,
          "crossover requires both amplitudes > 0");
  require(p > 2.5, ErrorClass::domain, "extra-force exponent must exceed 2.5");
  return std::pow(alpha2 / alpha1, 1.0 / (p - 2.5));
}

ForceModel ForceModel::pure_coulomb() {
  ForceModel m;
  m.kind = ForceModelKind::pure_coulomb;
  return m;
}

ForceModel ForceModel::extra_power(double alpha1, double alpha2, double p) {
  ForceModel m;
  m.kind = ForceModelKind::extra_power;
  m.alpha1 = alpha1;
  m.alpha2 = alpha2;
  m.p = p;
  m.validate();
  return m;
}

void ForceModel::validate() const {
  if (kind == ForceModelKind::pure_coulomb) return;
  require(std::isfinite(alpha1) && alpha1 >= 0.0, ErrorClass::invalid_argument,
          "alpha1 must be >= 0");
  require(std::isfinite(alpha2) && alpha2 >= 0.0, ErrorClass::invalid_argument,
          "alpha2 must be >= 0");
  require(std::isfinite(p) && p > 2.5, ErrorClass::invalid_argument,
          "extra-force exponent must exceed 2.5");
}

V0Profile V0Profile::constant(double v0) {
  V0Profile pr;
  pr.kind = V0ProfileKind::constant;
  pr.v0 = v0;
  pr.validate();
  return pr;
}

V0Profile V0Profile::linear(double v0_far, double slope) {
  V0Profile pr;
  pr.kind = V0ProfileKind::linear;
  pr.v0_far = v0_far;
  pr.slope = slope;
  pr.validate();
  return pr;
}

V0Profile V0Profile::saturating(double v0_far, double v0_near, double d_knee) {
  V0Profile pr;
  pr.kind = V0ProfileKind::saturating;
  pr.v0_far = v0_far;
  pr.v0_near = v0_near;
  pr.d_knee = d_knee;
  pr.validate();
  return pr;
}

double V0Profile::value(double d) const {
  require(d > 0.0 && std::isfinite(d), ErrorClass::domain, "gap must be > 0");
  switch (kind) {
    case V0ProfileKind::constant:
      return v0;
    case V0ProfileKind::linear:
      return v0_far + slope * d;
    case V0ProfileKind::saturating:
      return v0_near + (v0_far - v0_near) * d / (d + d_knee);
  }
  throw Error(ErrorClass::invalid_argument, "unknown V0 profile kind");
}

void V0Profile::validate() const {
  switch (kind) {
    case V0ProfileKind::constant:
      require(std::isfinite(v0), ErrorClass::invalid_argument, "v0 must be finite");
      return;
    case V0ProfileKind::linear:
      require(std::isfinite(v0_far) && std::isfinite(slope), ErrorClass::invalid_argument,
              "linear V0 profile parameters must be finite");
      return;
    case V0ProfileKind::saturating:
      require(std::isfinite(v0_far) && std::isfinite(v0_near), ErrorClass::invalid_argument,
              "saturating V0 profile levels must be finite");
      require(std::isfinite(d_knee) && d_knee > 0.0, ErrorClass::invalid_argument,
              "saturating V0 profile requires d_knee > 0");
      return;
  }
  throw Error(ErrorClass::invalid_argument, "unknown V0 profile kind");
}

void NoiseModel::validate() const {
  require(std::isfinite(sigma_nu) && sigma_nu >= 0.0, ErrorClass::invalid_argument,
          "sigma_nu must be >= 0");
  require(std::isfinite(sigma_nu_rel) && sigma_nu_rel >= 0.0, ErrorClass::invalid_argument,
          "sigma_nu_rel must be >= 0");
  require(std::isfinite(kel_drift_frac) && kel_drift_frac >= 0.0, ErrorClass::invalid_argument,
          "kel_drift_frac must be >= 0");
  require(std::isfinite(v0_sigma) && v0_sigma >= 0.0, ErrorClass::invalid_argument,
          "v0_sigma must be >= 0");
  require(std::isfinite(nu0_ramp), ErrorClass::invalid_argument, "nu0_ramp must be finite");
}

void Scenario::validate() const {
  if (force.kind == ForceModelKind::pure_coulomb) geom.validate();
  res.validate();
  force.validate();
  v0.validate();
  noise.validate();
}

double scenario_shift(const Scenario& sc, double d, double dv) {
  switch (sc.force.kind) {
    case ForceModelKind::pure_coulomb:
      // electrostatic_freq_shift takes (V, V0); feed the offset directly.
      return models::electrostatic_freq_shift(sc.geom, sc.res, d, dv, 0.0, 0.0);
    case ForceModelKind::extra_power:
      return hypothetical_shift(sc.force.alpha1, sc.force.alpha2, sc.force.p, d, dv);
  }
  throw Error(ErrorClass::invalid_argument, "unknown force model kind");
}

std::vector<CalibrationPoint> generate_calibration_run(const Scenario& sc, const PiezoMap& map,
                                                       const std::vector<double>& v_pzt_grid,
                                                       const std::vector<double>& v_bias_grid,
                                                       std::int64_t run_id) {
  sc.validate();
  map.validate();
  require(!v_pzt_grid.empty(), ErrorClass::invalid_argument, "empty V_PZT grid");
  require(!v_bias_grid.empty(), ErrorClass::invalid_argument, "empty V_bias grid");

  const std::size_t n_total = v_pzt_grid.size() * v_bias_grid.size();
  NormalRng rng(sc.noise.seed);
  std::vector<CalibrationPoint> points;
  points.reserve(n_total);

  std::size_t idx = 0;
  for (const double v_pzt : v_pzt_grid) {
    const double d = piezo_to_gap(map, v_pzt);
    const double v0_d = sc.v0.value(d) + sc.noise.v0_sigma * rng();
    for (const double v_bias : v_bias_grid) {
      double shift = scenario_shift(sc, d, v_bias - v0_d);
      // One slow drift cycle over the run, applied multiplicatively to the
      // shift term only.
      shift *= 1.0 + sc.noise.kel_drift_frac *
                         std::sin(2.0 * constants::pi * static_cast<double>(idx) /
                                  static_cast<double>(n_total));
      const double nu0_t =
          sc.res.nu0 + (n_total > 1 ? sc.noise.nu0_ramp * static_cast<double>(idx) /
                                          static_cast<double>(n_total - 1)
                                    : 0.0);
      const double nu_sq = nu0_t * nu0_t + shift;
      require(nu_sq > 0.0, ErrorClass::domain,
              "scenario drives nu^2 <= 0 (resonance lost) at V_PZT = " + std::to_string(v_pzt));
      // Per-point uncertainty: constant floor plus an optional term that keeps
      // the relative error of the nu^2 shift fixed (sigma_nu_rel of |shift|,
      // expressed in frequency via d(nu)/d(nu^2) = 1/(2 nu)).
      const double nu_clean = std::sqrt(nu_sq);
      const double sigma_pt = std::hypot(
          sc.noise.sigma_nu, sc.noise.sigma_nu_rel * std::abs(shift) / (2.0 * nu_clean));
      const double nu = nu_clean + sigma_pt * rng();
      require(nu > 0.0, ErrorClass::domain, "noise drove nu <= 0; sigma_nu too large");
      CalibrationPoint pt;
      pt.run_id = run_id;
      pt.timestamp = static_cast<std::int64_t>(idx);
      pt.v_pzt = v_pzt;
      pt.v_bias = v_bias;
      pt.nu = nu;
      pt.sigma_nu = sigma_pt;
      points.push_back(pt);
      ++idx;
    }
  }
  return points;
}

std::vector<CalibrationPoint> generate_fast_approach_run(const Scenario& sc, const PiezoMap& map,
                                                         const std::vector<double>& v_pzt_grid,
                                                         double v_bias, std::int64_t run_id) {
  return generate_calibration_run(sc, map, v_pzt_grid, std::vector<double>{v_bias}, run_id);
}

std::vector<CurvatureSample> generate_curvature_pseudodata(const Scenario& sc, const PiezoMap& map,
                                                           const std::vector<double>& gap_grid,
                                                           double sigma_rel) {
  sc.validate();
  map.validate();
  require(std::isfinite(sigma_rel) && sigma_rel > 0.0, ErrorClass::invalid_argument,
          "relative curvature uncertainty must be > 0");
  std::vector<CurvatureSample> samples;
  samples.reserve(gap_grid.size());
  for (const double d : gap_grid) {
    require(d > 0.0 && std::isfinite(d), ErrorClass::domain, "gap grid must be > 0");
    double k = 0.0;
    switch (sc.force.kind) {
      case ForceModelKind::pure_coulomb:
        k = models::curvature_coefficient(sc.geom, sc.res, d);
        break;
      case ForceModelKind::extra_power:
        k = sc.force.alpha1 / std::pow(d, 2.5) + sc.force.alpha2 / std::pow(d, sc.force.p);
        break;
    }
    CurvatureSample s;
    s.v_pzt = gap_to_piezo(map, d);
    s.k_el = k;
    s.sigma_k = sigma_rel * k;
    s.v0 = sc.v0.value(d);
    s.sigma_v0 = 0.0;
    s.nu0_sq = sc.res.nu0 * sc.res.nu0;
    samples.push_back(s);
  }
  return samples;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  require(lo > 0.0 && hi > lo && std::isfinite(hi), ErrorClass::invalid_argument,
          "log grid requires 0 < lo < hi");
  require(n >= 2, ErrorClass::invalid_argument, "log grid needs at least 2 points");
  std::vector<double> grid(n);
  const double ratio = std::log(hi / lo);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = lo * std::exp(ratio * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

}  // namespace cpcal::synth
