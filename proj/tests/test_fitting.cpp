#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "error.hpp"
#include "fitting.hpp"
#include "models.hpp"
#include "synth.hpp"

using namespace cpcal;
using namespace cpcal::fitting;
using namespace cpcal::synth;

namespace {

PiezoMap piezo() {
  PiezoMap m;
  m.beta = 91.9e-9;
  m.v0_pzt = 79.52;
  return m;
}

Scenario coulomb_scenario() {
  Scenario sc;
  sc.geom.kind = GeometryKind::cylinder_plane;
  sc.geom.a = 12e-3;
  sc.geom.L = 4e-3;
  sc.geom.L_eff = 4e-3;
  sc.res.m_eff = 2e-4;
  sc.res.nu0 = 1000.0;
  sc.force = ForceModel::pure_coulomb();
  sc.v0 = V0Profile::constant(0.163);
  return sc;
}

std::vector<double> v_pzt_for_gaps(const std::vector<double>& gaps) {
  std::vector<double> v;
  v.reserve(gaps.size());
  for (const double d : gaps) v.push_back(gap_to_piezo(piezo(), d));
  return v;
}

std::vector<double> biases() { return {-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0}; }

double rel(double x, double ref) { return std::abs(x / ref - 1.0); }

// Curvature amplitude of the pure-Coulomb scenario in V_PZT space,
// gamma = K_el(d) d^{2.5} / beta^{2.5}; frozen independently.
constexpr double kGammaTrue = 319754.72566206282;

}  // namespace

TEST_CASE("parabola fit inverts noise-free sweeps") {
  const Scenario sc = coulomb_scenario();
  const PiezoMap m = piezo();
  const double v_pzt = gap_to_piezo(m, 1e-6);
  const auto pts = generate_calibration_run(sc, m, {v_pzt}, biases());
  const CurvatureSample s = fit_parabola(pts);
  const double k_true = models::curvature_coefficient(sc.geom, sc.res, 1e-6);
  CHECK(rel(s.k_el, k_true) < 1e-9);
  CHECK(std::abs(s.v0 - 0.163) < 1e-9);
  CHECK(rel(s.nu0_sq, 1e6) < 1e-12);
  CHECK(s.sigma_k < 1e-6 * s.k_el);

  // Adding a constant to nu^2 moves the apex but not the curvature.
  auto shifted = pts;
  for (auto& p : shifted) p.nu = std::sqrt(p.nu * p.nu + 50.0);
  const CurvatureSample s2 = fit_parabola(shifted);
  CHECK(rel(s2.k_el, k_true) < 1e-9);
  CHECK(rel(s2.nu0_sq, 1e6 + 50.0) < 1e-12);
}

TEST_CASE("parabola fit tracks the V0 jitter distribution") {
  Scenario sc = coulomb_scenario();
  sc.noise.v0_sigma = 0.01;
  const PiezoMap m = piezo();
  const double v_pzt = gap_to_piezo(m, 1e-6);
  std::vector<double> v0s;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    sc.noise.seed = seed;
    v0s.push_back(fit_parabola(generate_calibration_run(sc, m, {v_pzt}, biases())).v0);
  }
  const double mean = std::accumulate(v0s.begin(), v0s.end(), 0.0) / v0s.size();
  double var = 0.0;
  for (const double v : v0s) var += (v - mean) * (v - mean);
  var /= (v0s.size() - 1);
  const double se = std::sqrt(var / v0s.size());
  CHECK(std::abs(mean - 0.163) < 3.0 * se);
  CHECK(std::sqrt(var) / 0.01 > 0.85);
  CHECK(std::sqrt(var) / 0.01 < 1.15);
}

TEST_CASE("parabola fit error conditions") {
  const Scenario sc = coulomb_scenario();
  const PiezoMap m = piezo();
  const double v_pzt = gap_to_piezo(m, 1e-6);
  auto pts = generate_calibration_run(sc, m, {v_pzt}, biases());

  CHECK_THROWS_AS(fit_parabola({pts.begin(), pts.begin() + 3}), Error);

  auto dup = pts;
  for (auto& p : dup) p.v_bias = 1.0;
  CHECK_THROWS_AS(fit_parabola(dup), Error);

  auto mixed = pts;
  mixed.back().v_pzt += 0.5;
  CHECK_THROWS_AS(fit_parabola(mixed), Error);

  auto upward = pts;
  for (auto& p : upward) p.nu = std::sqrt(1e6 + 5.0 * p.v_bias * p.v_bias);
  try {
    fit_parabola(upward);
    FAIL("expected a non-attractive curvature error");
  } catch (const Error& e) {
    CHECK(e.cls() == ErrorClass::convergence);
  }

  // Weighted path reports a positive curvature uncertainty.
  Scenario noisy = sc;
  noisy.noise.sigma_nu = 0.01;
  noisy.noise.seed = 5;
  const CurvatureSample s = fit_parabola(generate_calibration_run(noisy, m, {v_pzt}, biases()));
  CHECK(s.sigma_k > 0.0);
  CHECK(s.sigma_v0 > 0.0);
}

TEST_CASE("power-law fit recovers generator truth on noise-free samples") {
  const Scenario sc = coulomb_scenario();
  const PiezoMap m = piezo();
  const auto samples = generate_curvature_pseudodata(sc, m, log_spaced(5e-7, 1e-5, 25), 0.01);

  PowerLawOptions fixed;
  fixed.q_fixed = 2.5;
  const FitResult f = fit_curvature_powerlaw(samples, fixed);
  CHECK(rel(f.params.at("gamma"), kGammaTrue) < 1e-8);
  CHECK(std::abs(f.params.at("V0_PZT") - 79.52) < 1e-6);
  long double wk2 = 0;
  for (const auto& s : samples) wk2 += (s.k_el / s.sigma_k) * (s.k_el / s.sigma_k);
  CHECK(f.chi2 < 1e-12 * static_cast<double>(wk2));
  CHECK(f.dof == 25 - 2);
  CHECK(f.sigmas.at("q") == 0.0);

  PowerLawOptions free_q;
  free_q.q_free = true;
  const FitResult g = fit_curvature_powerlaw(samples, free_q);
  CHECK(rel(g.params.at("q"), 2.5) < 1e-8);
  CHECK(rel(g.params.at("gamma"), kGammaTrue) < 1e-7);
  CHECK(std::abs(g.params.at("V0_PZT") - 79.52) < 1e-6);
  CHECK(g.sigmas.at("q") > 0.0);
  CHECK(g.sigmas.at("q") < 0.01);
  CHECK(g.dof == 25 - 3);
  CHECK_FALSE(g.plateau);
}

TEST_CASE("power-law fit invariances: weight rescaling, reordering") {
  const Scenario sc = coulomb_scenario();
  const PiezoMap m = piezo();
  auto samples = generate_curvature_pseudodata(sc, m, log_spaced(5e-7, 1e-5, 20), 0.01);
  // Deterministic jitter so chi^2 is genuinely nonzero and its scaling under
  // a uniform weight change is observable.
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].k_el *= 1.0 + 0.005 * std::sin(3.0 * static_cast<double>(i) + 1.0);
  }

  PowerLawOptions free_q;
  free_q.q_free = true;
  const FitResult base = fit_curvature_powerlaw(samples, free_q);
  CHECK(base.chi2 > 1.0);

  auto rescaled = samples;
  for (auto& s : rescaled) s.sigma_k *= 3.0;
  const FitResult r3 = fit_curvature_powerlaw(rescaled, free_q);
  CHECK(rel(r3.params.at("q"), base.params.at("q")) < 1e-8);
  CHECK(rel(r3.params.at("gamma"), base.params.at("gamma")) < 1e-7);
  CHECK(rel(r3.chi2 * 9.0, base.chi2) < 1e-9);

  auto shuffled = samples;
  std::reverse(shuffled.begin(), shuffled.end());
  std::swap(shuffled[2], shuffled[11]);
  const FitResult s2 = fit_curvature_powerlaw(shuffled, free_q);
  CHECK(s2.params.at("q") == base.params.at("q"));
  CHECK(s2.params.at("gamma") == base.params.at("gamma"));
  CHECK(s2.params.at("V0_PZT") == base.params.at("V0_PZT"));
}

TEST_CASE("exponent scan has its minimum at the generator exponent") {
  const Scenario sc = coulomb_scenario();
  const PiezoMap m = piezo();
  const auto samples = generate_curvature_pseudodata(sc, m, log_spaced(5e-7, 1e-5, 20), 0.01);

  QGrid grid;
  grid.q_min = 2.0;
  grid.q_max = 3.0;
  grid.step = 0.01;
  const ExponentScan scan = exponent_chi2_scan(samples, grid, false);
  CHECK(std::abs(scan.q_min - 2.5) < 0.011);
  CHECK(scan.points.size() == 101);
  CHECK_FALSE(scan.plateau);

  auto rescaled = samples;
  for (auto& s : rescaled) s.sigma_k *= 5.0;
  const ExponentScan scan5 = exponent_chi2_scan(rescaled, grid, false);
  CHECK(scan5.q_min == scan.q_min);
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    if (scan.points[i].reduced_chi2 > 0.0) {
      CHECK(rel(scan5.points[i].reduced_chi2 * 25.0, scan.points[i].reduced_chi2) < 1e-6);
    }
  }

  QGrid bad;
  bad.q_min = 0.5;
  bad.q_max = 7.0;
  CHECK_THROWS_AS(exponent_chi2_scan(samples, bad, false), Error);
}

TEST_CASE("flat chi^2 profiles are flagged as plateaus and tie-break low") {
  // Constant curvature data: with the offset free, gamma = 0 fits exactly at
  // every exponent.
  std::vector<CurvatureSample> flat;
  for (int i = 0; i < 8; ++i) {
    CurvatureSample s;
    s.v_pzt = 10.0 + i;
    s.k_el = 100.0;
    s.sigma_k = 1.0;
    flat.push_back(s);
  }
  PowerLawOptions opt;
  opt.q_free = true;
  opt.offset_on = true;
  opt.q_grid.q_min = 1.0;
  opt.q_grid.q_max = 2.0;
  opt.q_grid.step = 0.5;
  const FitResult f = fit_curvature_powerlaw(flat, opt);
  CHECK(f.plateau);
  CHECK(f.params.at("q") == 1.0);
  CHECK(f.chi2 < 1e-12);

  QGrid grid = opt.q_grid;
  const ExponentScan scan = exponent_chi2_scan(flat, grid, true);
  CHECK(scan.plateau);
  CHECK(scan.q_min == 1.0);
}

TEST_CASE("Monte Carlo coverage: mean fitted exponent consistent with 2.5") {
  Scenario sc = coulomb_scenario();
  sc.noise.sigma_nu = 0.01;
  const PiezoMap m = piezo();
  const auto v_grid = v_pzt_for_gaps(log_spaced(1e-6, 8e-6, 10));

  PowerLawOptions free_q;
  free_q.q_free = true;
  free_q.q_grid.q_min = 2.0;
  free_q.q_grid.q_max = 3.0;

  std::vector<double> qs;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    sc.noise.seed = seed;
    const auto run = generate_calibration_run(sc, m, v_grid, biases());
    const auto samples = fit_all_parabolas(run);
    qs.push_back(fit_curvature_powerlaw(samples, free_q).params.at("q"));
  }
  const double mean = std::accumulate(qs.begin(), qs.end(), 0.0) / qs.size();
  double var = 0.0;
  for (const double q : qs) var += (q - mean) * (q - mean);
  var /= (qs.size() - 1);
  const double se = std::sqrt(var / qs.size());
  CHECK(std::abs(mean - 2.5) < 3.0 * se);
  CHECK(std::sqrt(var) < 0.2);
}

TEST_CASE("truncation scan stays at 2.5 on pure-Coulomb samples") {
  const Scenario sc = coulomb_scenario();
  const PiezoMap m = piezo();
  const auto samples = generate_curvature_pseudodata(sc, m, log_spaced(3e-7, 3e-5, 20), 0.01);

  QGrid grid;
  grid.q_min = 1.0;
  grid.q_max = 4.0;
  grid.step = 0.05;
  const TruncationScan scan = truncation_scan(samples, piezo().beta, grid);
  REQUIRE(scan.rows.size() == 15);
  CHECK(std::abs(scan.v0_pzt_ref - 79.52) < 1e-6);
  CHECK(rel(scan.rows.front().d_min, 3e-7) < 1e-5);
  for (std::size_t i = 0; i < scan.rows.size(); ++i) {
    const auto& row = scan.rows[i];
    CHECK(row.n_removed == i);
    CHECK(row.n_retained == 20 - i);
    CHECK(std::abs(row.q_opt - 2.5) < 1e-6);
    CHECK(rel(row.gamma_q25, kGammaTrue) < 1e-7);
    if (i > 0) CHECK(row.d_min > scan.rows[i - 1].d_min);
  }
  CHECK(scan.rows.back().n_retained == 6);

  CHECK_THROWS_AS(truncation_scan({samples.begin(), samples.begin() + 5}, piezo().beta, grid),
                  Error);
}

TEST_CASE("fast-approach fit recovers the Coulomb amplitude and exponent") {
  const Scenario sc = coulomb_scenario();
  const PiezoMap m = piezo();
  const auto v_grid = v_pzt_for_gaps(log_spaced(5e-7, 8e-6, 40));
  const auto pts = generate_fast_approach_run(sc, m, v_grid, 4.0);

  const double dv = 4.0 - 0.163;
  PowerLawOptions fixed;
  fixed.q_fixed = 2.5;
  const FitResult f = fit_fast_approach(pts, fixed);
  CHECK(rel(f.params.at("A"), kGammaTrue * dv * dv) < 1e-8);
  CHECK(rel(f.params.at("nu0_sq"), 1e6) < 1e-10);
  CHECK(std::abs(f.params.at("V0_PZT") - 79.52) < 1e-6);
  CHECK(rel(effective_mass_from_gamma(f.params.at("A") / (dv * dv), sc.geom, m.beta), 2e-4) <
        1e-8);

  PowerLawOptions free_q;
  free_q.q_free = true;
  const FitResult g = fit_fast_approach(pts, free_q);
  CHECK(std::abs(g.params.at("q") - 2.5) < 1e-6);

  auto varying = pts;
  varying.back().v_bias = 3.0;
  CHECK_THROWS_AS(fit_fast_approach(varying, fixed), Error);
}

TEST_CASE("residual analysis: flat for pure Coulomb, systematic for extra force") {
  const PiezoMap m = piezo();
  const auto gaps = log_spaced(4e-7, 8e-6, 80);
  const auto v_grid = v_pzt_for_gaps(gaps);
  const Window fit_win{gap_to_piezo(m, 8.0001e-6), gap_to_piezo(m, 2e-6)};
  const Window eval_win{gap_to_piezo(m, 1.9999e-6), gap_to_piezo(m, 3.9999e-7)};

  const Scenario pure = coulomb_scenario();
  const auto pts = generate_fast_approach_run(pure, m, v_grid, 4.0);
  const ResidualReport rep =
      residual_analysis(pts, fit_win, eval_win, 2.5, pure.geom, m.beta, 0.163);
  CHECK(rel(rep.m_eff, 2e-4) < 1e-6);
  for (const auto& row : rep.rows) {
    CHECK(std::abs(row.nu_sq_residual) < 1e-4);
    CHECK(std::abs(row.force_residual) < 1e-13);
  }
  for (std::size_t i = 1; i < rep.rows.size(); ++i) CHECK(rep.rows[i].d > rep.rows[i - 1].d);

  // Extra power-law force with crossover near 0.4 um.
  const double c_amp = models::curvature_coefficient(pure.geom, pure.res, 1.0);
  Scenario extra = pure;
  extra.force = ForceModel::extra_power(c_amp, 0.1 * c_amp * std::pow(1e-6, 2.5), 5.0);
  std::vector<double> peaks;
  for (const double bias : {3.0, 4.0, 5.0}) {
    const auto eps = generate_fast_approach_run(extra, m, v_grid, bias);
    const ResidualReport er =
        residual_analysis(eps, fit_win, eval_win, 2.5, extra.geom, m.beta, 0.163);
    const auto& near = er.rows.front();  // smallest gap
    CHECK(near.nu_sq_residual < -1e3);
    CHECK(near.force_residual > 0.0);  // excess attraction
    double peak = 0.0;
    for (const auto& row : er.rows) peak = std::max(peak, -row.nu_sq_residual);
    peaks.push_back(peak);
  }
  CHECK(peaks[0] < peaks[1]);
  CHECK(peaks[1] < peaks[2]);
  const double expected_ratio = std::pow((5.0 - 0.163) / (3.0 - 0.163), 2.0);
  CHECK(std::abs(peaks[2] / peaks[0] / expected_ratio - 1.0) < 0.2);
}

TEST_CASE("effective mass extraction") {
  const Geometry g = coulomb_scenario().geom;
  CHECK(rel(effective_mass_from_gamma(kGammaTrue, g, 91.9e-9), 2e-4) < 1e-12);
  CHECK(rel(effective_mass_from_gamma(2.0 * kGammaTrue, g, 91.9e-9), 1e-4) < 1e-12);
  CHECK_THROWS_AS(effective_mass_from_gamma(0.0, g, 91.9e-9), Error);
  CHECK_THROWS_AS(effective_mass_from_gamma(-1.0, g, 91.9e-9), Error);
}

TEST_CASE("fit preconditions") {
  const Scenario sc = coulomb_scenario();
  const PiezoMap m = piezo();
  const auto samples = generate_curvature_pseudodata(sc, m, log_spaced(1e-6, 2e-6, 3), 0.01);
  PowerLawOptions free_q;
  free_q.q_free = true;
  CHECK_THROWS_AS(fit_curvature_powerlaw(samples, free_q), Error);  // 3 samples, 3 params

  auto zero_sigma = generate_curvature_pseudodata(sc, m, log_spaced(1e-6, 8e-6, 10), 0.01);
  for (auto& s : zero_sigma) s.sigma_k = 0.0;
  PowerLawOptions fixed;
  const FitResult f = fit_curvature_powerlaw(zero_sigma, fixed);
  CHECK(f.unit_weights);
  CHECK(rel(f.params.at("gamma"), kGammaTrue) < 1e-8);
}
