#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "geometry.hpp"

// Calibration analysis engine: per-distance parabola fits, weighted
// power-law fits of the curvature vs piezo voltage with fixed or free
// exponent and optional constant offset, reduced-chi^2 exponent scans,
// truncation scans, fast-approach fits, residual analysis, and
// effective-mass extraction.
//
// All fits are pure functions of their inputs; samples are sorted
// internally, so results are bit-identical under input reordering.
namespace cpcal::fitting {

// Exponent grid for free-exponent profiles, inclusive of both ends.
struct QGrid {
  double q_min = 0.5;
  double q_max = 4.0;
  double step = 0.01;
  void validate() const;
  std::vector<double> values() const;
};

// Named parameter map. Curvature fits use keys gamma, V0_PZT, q, and
// offset (when enabled); fast-approach fits use A, nu0_sq, V0_PZT, q.
// Sigmas follow the Delta-chi^2 = 1 convention from the numerical Hessian at
// the minimum; a degenerate direction yields a NaN sigma.
struct FitResult {
  std::map<std::string, double> params;
  std::map<std::string, double> sigmas;
  double chi2 = 0;
  std::size_t dof = 0;
  double reduced_chi2 = 0;
  bool unit_weights = false;  // set when input sigmas were not all > 0
  bool plateau = false;       // free-q profile was flat within 1e-9
};

// Weighted least-squares parabola nu^2 = c0 + c1 V + c2 V^2 over one bias
// sweep (all points at the same V_PZT, >= 4 distinct biases). Returns
// K_el = -c2, V0 = -c1/(2 c2), nu0_sq = c0 - c1^2/(4 c2) with uncertainties
// propagated from the coefficient covariance. Weighted by 1/sigma_{nu^2}
// when every sigma_nu > 0, otherwise unweighted with residual-variance
// scaling. An upward or flat curvature (c2 >= 0) is a convergence error.
CurvatureSample fit_parabola(const std::vector<CalibrationPoint>& sweep);

// Groups a full run by exact V_PZT value, fits every sweep, and returns the
// samples ordered from the smallest gap (largest V_PZT) outward.
std::vector<CurvatureSample> fit_all_parabolas(const std::vector<CalibrationPoint>& run);

struct PowerLawOptions {
  bool q_free = false;
  double q_fixed = 2.5;   // used when q_free is false
  bool offset_on = false;
  QGrid q_grid;           // profile grid when q_free
};

// Weighted fit of K(V_PZT) = gamma (V0_PZT - V_PZT)^{-q} [+ offset].
// Nested optimization: for fixed (V0_PZT, q) the model is linear in
// (gamma, offset) and solved in closed form; V0_PZT is found by a coarse
// log-spaced bracket above max(V_PZT) followed by golden-section descent;
// a free q is profiled over q_grid and golden-refined around the best node.
FitResult fit_curvature_powerlaw(const std::vector<CurvatureSample>& samples,
                                 const PowerLawOptions& opt);

struct ExponentScanPoint {
  double q = 0;
  double reduced_chi2 = 0;
};

struct ExponentScan {
  std::vector<ExponentScanPoint> points;
  double q_min = 0;           // grid q with the smallest reduced chi^2
  double reduced_chi2_min = 0;
  bool plateau = false;       // multiple grid nodes tie within 1e-9 (smallest reported)
};

// Reduced-chi^2 profile over an exponent grid (grid restricted to (0, 6]);
// the remaining parameters are re-optimized at every node.
ExponentScan exponent_chi2_scan(const std::vector<CurvatureSample>& samples, const QGrid& grid,
                                bool offset_on);

struct TruncationRow {
  std::size_t n_removed = 0;   // closest-distance samples dropped
  std::size_t n_retained = 0;
  double d_min = 0;            // smallest retained gap, from the full-set fixed-2.5 fit [m]
  double q_opt = 0;            // free-exponent fit on the retained samples
  double sigma_q = 0;
  double v0_pzt_free = 0;      // contact voltage of the free-exponent fit [V]
  double gamma_q25 = 0;        // fixed q = 2.5 fit on the retained samples
  double sigma_gamma_q25 = 0;
  double v0_pzt_q25 = 0;
  double sigma_v0_pzt_q25 = 0;
};

struct TruncationScan {
  std::vector<TruncationRow> rows;  // in removal order, starting from the full set
  double v0_pzt_ref = 0;  // contact voltage of the full-set fixed-2.5 fit [V]
};

// Repeatedly removes the closest-distance sample and refits (free q and
// fixed 2.5) while at least 6 samples remain. Distances are nominal: mapped
// through beta and the full-set fixed-2.5 contact voltage.
TruncationScan truncation_scan(const std::vector<CurvatureSample>& samples, double beta,
                               const QGrid& grid);

// Constant-bias approach fit nu^2 = nu0_sq - A (V0_PZT - V_PZT)^{-q}, same
// optimizer as fit_curvature_powerlaw with the offset (nu0_sq) always on.
FitResult fit_fast_approach(const std::vector<CalibrationPoint>& points,
                            const PowerLawOptions& opt);

// Inclusive piezo-voltage window.
struct Window {
  double v_pzt_lo = 0;
  double v_pzt_hi = 0;
  bool contains(double v) const { return v >= v_pzt_lo && v <= v_pzt_hi; }
};

struct ResidualRow {
  double v_pzt = 0;
  double d = 0;                // gap from the far-window fit [m]
  double nu_sq_residual = 0;   // nu^2 - nu^2_fit [Hz^2]
  double force_residual = 0;   // excess attractive force [N], zero at the farthest row
};

struct ResidualReport {
  std::vector<ResidualRow> rows;  // evaluation window, ordered by increasing gap
  FitResult far_fit;              // fixed-exponent fit on the fit window
  double m_eff = 0;               // effective mass implied by the fitted amplitude [kg]
};

// Fits the fixed-exponent Coulomb model on the far fit_window only, then
// evaluates nu^2 residuals over eval_window. The force residual integrates
// the spring-constant residual 4 pi^2 m_eff (nu^2 - nu^2_fit) over the gap
// (trapezoid rule) from the farthest evaluated row, where it is anchored to
// zero; positive values mean excess attraction. m_eff comes from the fitted
// amplitude via gamma = A/(V_bias - v0)^2; v0 is the minimizing potential
// known from calibration.
ResidualReport residual_analysis(const std::vector<CalibrationPoint>& points, Window fit_window,
                                 Window eval_window, double q, const Geometry& geom, double beta,
                                 double v0);

// Inverts gamma = 3 eps0 sqrt(a) L_eff / (16 sqrt(2) pi m_eff beta^{5/2})
// for the effective mass.
double effective_mass_from_gamma(double gamma, const Geometry& geom, double beta);

}  // namespace cpcal::fitting
