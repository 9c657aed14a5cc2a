#include "fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "constants.hpp"
#include "error.hpp"

namespace cpcal::fitting {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
// Contact-voltage bracket above max(V_PZT), as fractions of the V_PZT span.
constexpr double kBracketLo = 1e-9;
constexpr double kBracketHi = 50.0;
constexpr int kCoarseNodes = 200;
// Ties in scanned chi^2 closer than this are reported as a plateau.
constexpr double kPlateauTol = 1e-9;

// Weighted (x, y) data for the power-law model y = gamma (v0 - x)^{-q} [+ c].
struct PowerLawData {
  std::vector<double> x;  // ascending
  std::vector<double> y;
  std::vector<double> w;
  double x_max = 0;
  double span = 0;
  double y_rms = 0;
  bool unit_weights = false;
};

PowerLawData make_power_data(std::vector<double> x, std::vector<double> y,
                             const std::vector<double>& sigma, std::size_t n_free) {
  const std::size_t n = x.size();
  require(n >= n_free + 1, ErrorClass::invalid_argument,
          "need at least " + std::to_string(n_free + 1) + " samples for " +
              std::to_string(n_free) + " free parameters");
  PowerLawData d;
  d.unit_weights = std::any_of(sigma.begin(), sigma.end(), [](double s) { return !(s > 0.0); });
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });
  d.x.reserve(n);
  d.y.reserve(n);
  d.w.reserve(n);
  long double y2 = 0;
  for (const std::size_t i : order) {
    require(std::isfinite(x[i]) && std::isfinite(y[i]), ErrorClass::invalid_argument,
            "samples must be finite");
    d.x.push_back(x[i]);
    d.y.push_back(y[i]);
    d.w.push_back(d.unit_weights ? 1.0 : 1.0 / (sigma[i] * sigma[i]));
    y2 += static_cast<long double>(d.w.back()) * y[i] * y[i];
  }
  d.x_max = d.x.back();
  d.span = d.x.back() - d.x.front();
  d.y_rms = std::sqrt(static_cast<double>(y2) / static_cast<double>(n));
  require(d.span > 0.0, ErrorClass::invalid_argument, "samples span a single V_PZT value");
  std::size_t distinct = 1;
  for (std::size_t i = 1; i < n; ++i) distinct += d.x[i] != d.x[i - 1];
  require(distinct > n_free, ErrorClass::invalid_argument,
          "need more distinct V_PZT values than free parameters");
  return d;
}

struct Inner {
  double gamma = 0;
  double offset = 0;
  double chi2 = kInf;
};

// Closed-form weighted linear solve for (gamma [, offset]) at fixed (v0, q).
// Sums accumulate in long double, and chi^2 is taken from explicit residuals
// (never the expanded quadratic form, whose ~|y|^2-sized terms would bury a
// near-zero residual under cancellation noise and flatten the search basin).
Inner inner_solve(const PowerLawData& d, double v0, double q, bool offset_on) {
  Inner out;
  if (!(v0 > d.x_max)) return out;
  thread_local std::vector<double> basis;
  const std::size_t n = d.x.size();
  basis.resize(n);
  long double s_ff = 0, s_f = 0, s_w = 0, s_fy = 0, s_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = v0 - d.x[i];
    const double f = std::exp(-q * std::log(u));
    basis[i] = f;
    const long double wf = static_cast<long double>(d.w[i]) * f;
    s_ff += wf * f;
    s_f += wf;
    s_w += d.w[i];
    s_fy += wf * d.y[i];
    s_y += static_cast<long double>(d.w[i]) * d.y[i];
  }
  long double gamma = 0, offset = 0;
  if (offset_on) {
    const long double det = s_ff * s_w - s_f * s_f;
    if (!(det > 0)) return out;
    gamma = (s_fy * s_w - s_f * s_y) / det;
    offset = (s_ff * s_y - s_f * s_fy) / det;
  } else {
    if (!(s_ff > 0)) return out;
    gamma = s_fy / s_ff;
  }
  long double chi2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long double r = d.y[i] - gamma * basis[i] - offset;
    chi2 += d.w[i] * r * r;
  }
  out.gamma = static_cast<double>(gamma);
  out.offset = static_cast<double>(offset);
  out.chi2 = static_cast<double>(chi2);
  if (!std::isfinite(out.chi2)) out.chi2 = kInf;
  return out;
}

template <typename F>
double golden_min(F&& f, double a, double b, double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

struct V0Opt {
  double u0 = 0;  // v0 = x_max + u0
  Inner inner;
};

// Fixed-q contact-voltage search: coarse log-spaced bracket over
// u0 in [1e-9, 50] spans, then golden-section descent in ln(u0).
V0Opt optimize_v0(const PowerLawData& d, double q, bool offset_on, double tol_ln) {
  const double t_lo = std::log(kBracketLo * d.span);
  const double t_hi = std::log(kBracketHi * d.span);
  int best = -1;
  double best_chi2 = kInf;
  std::vector<double> ts(kCoarseNodes);
  for (int j = 0; j < kCoarseNodes; ++j) {
    ts[j] = t_lo + (t_hi - t_lo) * j / (kCoarseNodes - 1);
    const double chi2 = inner_solve(d, d.x_max + std::exp(ts[j]), q, offset_on).chi2;
    if (chi2 < best_chi2) {
      best_chi2 = chi2;
      best = j;
    }
  }
  if (best < 0) {
    std::ostringstream msg;
    msg << "power-law fit did not converge: no finite chi^2 on the contact-voltage bracket"
        << " (q = " << q << ", u0 in [" << kBracketLo * d.span << ", " << kBracketHi * d.span
        << "] V, " << d.x.size() << " samples)";
    throw Error(ErrorClass::convergence, msg.str());
  }
  const double a = ts[std::max(best - 1, 0)];
  const double b = ts[std::min(best + 1, kCoarseNodes - 1)];
  const double t_opt = golden_min(
      [&](double t) { return inner_solve(d, d.x_max + std::exp(t), q, offset_on).chi2; }, a, b,
      tol_ln);
  V0Opt out;
  out.u0 = std::exp(t_opt);
  out.inner = inner_solve(d, d.x_max + out.u0, q, offset_on);
  return out;
}

struct EngineResult {
  double gamma = 0, offset = 0, v0 = 0, q = 0, u0 = 0;
  double sigma_gamma = kNan, sigma_offset = kNan, sigma_v0 = kNan, sigma_q = kNan;
  double chi2 = 0;
  bool plateau = false;
};

// Fit uncertainties from the linearized normal matrix G = J^T W J at the
// minimum: cov = G^{-1} (the Delta-chi^2 = 1 convention for chi^2 = sum w r^2).
// G is equilibrated to unit diagonal before inversion so that the strong
// gamma/V0/q correlations of a wide-range power law invert stably; genuinely
// degenerate directions still surface as NaN.
void fill_sigmas(const PowerLawData& d, bool offset_on, bool q_free, EngineResult& r) {
  const std::size_t k = 2 + (offset_on ? 1 : 0) + (q_free ? 1 : 0);
  std::vector<long double> acc(k * k, 0.0L);
  std::vector<double> col(k);
  for (std::size_t row = 0; row < d.x.size(); ++row) {
    const double u = r.v0 - d.x[row];
    const double f = std::exp(-r.q * std::log(u));
    std::size_t i = 0;
    col[i++] = f;                                        // d(model)/d(gamma)
    if (offset_on) col[i++] = 1.0;                       // d(model)/d(offset)
    col[i++] = -r.gamma * r.q * f / u;                   // d(model)/d(V0)
    if (q_free) col[i++] = -r.gamma * f * std::log(u);   // d(model)/d(q)
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a; b < k; ++b)
        acc[a * k + b] += static_cast<long double>(d.w[row]) * col[a] * col[b];
  }
  std::vector<double> sig(k, kNan);
  Eigen::VectorXd scale(k);
  bool diag_ok = true;
  for (std::size_t a = 0; a < k; ++a) {
    const double g_aa = static_cast<double>(acc[a * k + a]);
    scale(a) = std::sqrt(g_aa);
    diag_ok = diag_ok && std::isfinite(g_aa) && g_aa > 0.0;
  }
  if (diag_ok) {
    Eigen::MatrixXd corr(k, k);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a; b < k; ++b)
        corr(a, b) = corr(b, a) =
            static_cast<double>(acc[a * k + b]) / (scale(a) * scale(b));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(corr);
    if (lu.isInvertible()) {
      const Eigen::MatrixXd inv = lu.inverse();
      for (std::size_t a = 0; a < k; ++a) {
        const double v = inv(a, a);
        sig[a] = v >= 0.0 && std::isfinite(v) ? std::sqrt(v) / scale(a) : kNan;
      }
    }
  }
  std::size_t i = 0;
  r.sigma_gamma = sig[i++];
  if (offset_on) r.sigma_offset = sig[i++];
  r.sigma_v0 = sig[i++];
  if (q_free) r.sigma_q = sig[i++];
}

EngineResult run_engine(const PowerLawData& d, const PowerLawOptions& opt) {
  EngineResult r;
  if (!opt.q_free) {
    r.q = opt.q_fixed;
    require(std::isfinite(r.q) && r.q > 0.0, ErrorClass::invalid_argument,
            "fixed exponent must be > 0");
    const V0Opt v = optimize_v0(d, r.q, opt.offset_on, 1e-12);
    r.u0 = v.u0;
    r.v0 = d.x_max + v.u0;
    r.gamma = v.inner.gamma;
    r.offset = v.inner.offset;
    r.chi2 = v.inner.chi2;
  } else {
    opt.q_grid.validate();
    const std::vector<double> qs = opt.q_grid.values();
    std::vector<double> chi2s(qs.size());
    for (std::size_t j = 0; j < qs.size(); ++j) {
      chi2s[j] = optimize_v0(d, qs[j], opt.offset_on, 3e-7).inner.chi2;
    }
    const std::size_t j_min =
        static_cast<std::size_t>(std::min_element(chi2s.begin(), chi2s.end()) - chi2s.begin());
    require(std::isfinite(chi2s[j_min]), ErrorClass::convergence,
            "free-exponent profile has no finite chi^2 on the grid");
    const double tie = kPlateauTol * std::max(1.0, chi2s[j_min]);
    std::size_t j_first = j_min;
    std::size_t ties = 0;
    for (std::size_t j = 0; j < qs.size(); ++j) {
      if (chi2s[j] - chi2s[j_min] <= tie) {
        ++ties;
        j_first = std::min(j_first, j);
      }
    }
    if (ties > 1) {
      r.plateau = true;
      r.q = qs[j_first];
    } else {
      const double a = qs[j_min > 0 ? j_min - 1 : 0];
      const double b = qs[std::min(j_min + 1, qs.size() - 1)];
      r.q = a < b ? golden_min(
                        [&](double q) { return optimize_v0(d, q, opt.offset_on, 1e-8).inner.chi2; },
                        a, b, 1e-9)
                  : qs[j_min];
    }
    const V0Opt v = optimize_v0(d, r.q, opt.offset_on, 1e-12);
    r.u0 = v.u0;
    r.v0 = d.x_max + v.u0;
    r.gamma = v.inner.gamma;
    r.offset = v.inner.offset;
    r.chi2 = v.inner.chi2;
  }
  fill_sigmas(d, opt.offset_on, opt.q_free, r);
  if (!opt.q_free) r.sigma_q = 0.0;
  return r;
}

std::size_t free_param_count(const PowerLawOptions& opt) {
  return 2 + (opt.q_free ? 1 : 0) + (opt.offset_on ? 1 : 0);
}

FitResult package(const PowerLawData& d, const PowerLawOptions& opt, const EngineResult& r) {
  FitResult out;
  out.params["gamma"] = r.gamma;
  out.sigmas["gamma"] = r.sigma_gamma;
  out.params["V0_PZT"] = r.v0;
  out.sigmas["V0_PZT"] = r.sigma_v0;
  out.params["q"] = r.q;
  out.sigmas["q"] = r.sigma_q;
  if (opt.offset_on) {
    out.params["offset"] = r.offset;
    out.sigmas["offset"] = r.sigma_offset;
  }
  out.chi2 = r.chi2;
  out.dof = d.x.size() - free_param_count(opt);
  out.reduced_chi2 = r.chi2 / static_cast<double>(out.dof);
  out.unit_weights = d.unit_weights;
  out.plateau = r.plateau;
  return out;
}

}  // namespace

void QGrid::validate() const {
  require(std::isfinite(q_min) && q_min > 0.0, ErrorClass::invalid_argument,
          "exponent grid requires q_min > 0");
  require(std::isfinite(q_max) && q_max > q_min, ErrorClass::invalid_argument,
          "exponent grid requires q_max > q_min");
  require(std::isfinite(step) && step > 0.0, ErrorClass::invalid_argument,
          "exponent grid requires step > 0");
}

std::vector<double> QGrid::values() const {
  validate();
  std::vector<double> qs;
  const auto n = static_cast<std::size_t>(std::floor((q_max - q_min) / step + 1e-9));
  qs.reserve(n + 2);
  for (std::size_t i = 0; i <= n; ++i) qs.push_back(q_min + static_cast<double>(i) * step);
  if (qs.back() < q_max - 1e-12 * (q_max - q_min)) qs.push_back(q_max);
  return qs;
}

CurvatureSample fit_parabola(const std::vector<CalibrationPoint>& sweep) {
  const std::size_t n = sweep.size();
  require(n >= 4, ErrorClass::invalid_argument, "parabola fit needs at least 4 points");
  std::vector<double> bias;
  bias.reserve(n);
  for (const auto& p : sweep) {
    require(p.v_pzt == sweep.front().v_pzt, ErrorClass::invalid_argument,
            "parabola fit expects a single-V_PZT bias sweep");
    bias.push_back(p.v_bias);
  }
  std::sort(bias.begin(), bias.end());
  require(std::unique(bias.begin(), bias.end()) - bias.begin() >= 4,
          ErrorClass::invalid_argument, "parabola fit needs at least 4 distinct biases");

  const bool unit_weights =
      std::any_of(sweep.begin(), sweep.end(), [](const auto& p) { return !(p.sigma_nu > 0.0); });
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd rhs(n);
  Eigen::VectorXd rw(n);  // sqrt of weights
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = sweep[i];
    const double sigma_y = 2.0 * p.nu * p.sigma_nu;
    rw(i) = unit_weights ? 1.0 : 1.0 / sigma_y;
    design(i, 0) = 1.0;
    design(i, 1) = p.v_bias;
    design(i, 2) = p.v_bias * p.v_bias;
    rhs(i) = p.nu * p.nu;
  }
  const Eigen::MatrixXd a = rw.asDiagonal() * design;
  const Eigen::VectorXd b = rw.asDiagonal() * rhs;
  const Eigen::MatrixXd ata = a.transpose() * a;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(ata);
  require(lu.isInvertible(), ErrorClass::invalid_argument, "degenerate bias design matrix");
  const Eigen::VectorXd coef = lu.solve(a.transpose() * b);
  Eigen::MatrixXd cov = lu.inverse();
  if (unit_weights) {
    const double ssr = (b - a * coef).squaredNorm();
    cov *= ssr / static_cast<double>(n - 3);
  }
  const double c0 = coef(0), c1 = coef(1), c2 = coef(2);
  require(c2 < 0.0, ErrorClass::convergence, "non-attractive curvature (c2 >= 0)");

  CurvatureSample s;
  s.v_pzt = sweep.front().v_pzt;
  s.k_el = -c2;
  s.sigma_k = std::sqrt(cov(2, 2));
  s.v0 = -c1 / (2.0 * c2);
  s.nu0_sq = c0 - c1 * c1 / (4.0 * c2);
  // V0 = -c1/(2 c2): propagate the (c1, c2) covariance block.
  const double dv1 = -1.0 / (2.0 * c2);
  const double dv2 = c1 / (2.0 * c2 * c2);
  s.sigma_v0 = std::sqrt(std::max(
      dv1 * dv1 * cov(1, 1) + 2.0 * dv1 * dv2 * cov(1, 2) + dv2 * dv2 * cov(2, 2), 0.0));
  return s;
}

std::vector<CurvatureSample> fit_all_parabolas(const std::vector<CalibrationPoint>& run) {
  std::map<double, std::vector<CalibrationPoint>> sweeps;
  for (const auto& p : run) sweeps[p.v_pzt].push_back(p);
  std::vector<CurvatureSample> samples;
  samples.reserve(sweeps.size());
  // Map order is ascending V_PZT; emit largest V_PZT (smallest gap) first.
  for (auto it = sweeps.rbegin(); it != sweeps.rend(); ++it) {
    samples.push_back(fit_parabola(it->second));
  }
  return samples;
}

FitResult fit_curvature_powerlaw(const std::vector<CurvatureSample>& samples,
                                 const PowerLawOptions& opt) {
  std::vector<double> x, y, s;
  x.reserve(samples.size());
  y.reserve(samples.size());
  s.reserve(samples.size());
  for (const auto& c : samples) {
    x.push_back(c.v_pzt);
    y.push_back(c.k_el);
    s.push_back(c.sigma_k);
  }
  const PowerLawData d = make_power_data(std::move(x), std::move(y), s, free_param_count(opt));
  return package(d, opt, run_engine(d, opt));
}

ExponentScan exponent_chi2_scan(const std::vector<CurvatureSample>& samples, const QGrid& grid,
                                bool offset_on) {
  grid.validate();
  require(grid.q_max <= 6.0, ErrorClass::invalid_argument,
          "exponent scan grid must stay within (0, 6]");
  PowerLawOptions opt;
  opt.offset_on = offset_on;
  ExponentScan scan;
  for (const double q : grid.values()) {
    opt.q_fixed = q;
    const FitResult fit = fit_curvature_powerlaw(samples, opt);
    scan.points.push_back({q, fit.reduced_chi2});
  }
  const auto best = std::min_element(
      scan.points.begin(), scan.points.end(),
      [](const auto& a, const auto& b) { return a.reduced_chi2 < b.reduced_chi2; });
  const double tie = kPlateauTol * std::max(1.0, best->reduced_chi2);
  std::size_t ties = 0;
  double q_first = best->q;
  for (const auto& p : scan.points) {
    if (p.reduced_chi2 - best->reduced_chi2 <= tie) {
      ++ties;
      q_first = std::min(q_first, p.q);
    }
  }
  scan.plateau = ties > 1;
  scan.q_min = q_first;
  scan.reduced_chi2_min = best->reduced_chi2;
  return scan;
}

TruncationScan truncation_scan(const std::vector<CurvatureSample>& samples, double beta,
                               const QGrid& grid) {
  require(std::isfinite(beta) && beta > 0.0, ErrorClass::invalid_argument,
          "actuation coefficient must be > 0");
  constexpr std::size_t kMinRetained = 6;
  std::vector<CurvatureSample> sorted = samples;
  // Ascending V_PZT: the closest-distance sample is at the back.
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.v_pzt < b.v_pzt; });
  require(sorted.size() >= kMinRetained, ErrorClass::invalid_argument,
          "truncation scan needs at least 6 samples");

  PowerLawOptions fixed;
  fixed.q_fixed = 2.5;
  PowerLawOptions free_q;
  free_q.q_free = true;
  free_q.q_grid = grid;

  TruncationScan scan;
  scan.v0_pzt_ref = fit_curvature_powerlaw(sorted, fixed).params.at("V0_PZT");
  std::vector<CurvatureSample> retained = sorted;
  for (std::size_t removed = 0; sorted.size() - removed >= kMinRetained; ++removed) {
    retained.assign(sorted.begin(), sorted.end() - static_cast<std::ptrdiff_t>(removed));
    const FitResult f_free = fit_curvature_powerlaw(retained, free_q);
    const FitResult f_25 = fit_curvature_powerlaw(retained, fixed);
    TruncationRow row;
    row.n_removed = removed;
    row.n_retained = retained.size();
    row.d_min = beta * (scan.v0_pzt_ref - retained.back().v_pzt);
    row.q_opt = f_free.params.at("q");
    row.sigma_q = f_free.sigmas.at("q");
    row.v0_pzt_free = f_free.params.at("V0_PZT");
    row.gamma_q25 = f_25.params.at("gamma");
    row.sigma_gamma_q25 = f_25.sigmas.at("gamma");
    row.v0_pzt_q25 = f_25.params.at("V0_PZT");
    row.sigma_v0_pzt_q25 = f_25.sigmas.at("V0_PZT");
    scan.rows.push_back(row);
  }
  return scan;
}

FitResult fit_fast_approach(const std::vector<CalibrationPoint>& points,
                            const PowerLawOptions& opt) {
  require(!points.empty(), ErrorClass::invalid_argument, "no points to fit");
  std::vector<double> x, y, s;
  x.reserve(points.size());
  y.reserve(points.size());
  s.reserve(points.size());
  for (const auto& p : points) {
    require(p.v_bias == points.front().v_bias, ErrorClass::invalid_argument,
            "fast-approach fit expects a constant bias");
    x.push_back(p.v_pzt);
    y.push_back(p.nu * p.nu);
    s.push_back(2.0 * p.nu * p.sigma_nu);
  }
  PowerLawOptions engine_opt = opt;
  engine_opt.offset_on = true;  // nu0_sq is always a parameter of this model
  const PowerLawData d =
      make_power_data(std::move(x), std::move(y), s, free_param_count(engine_opt));
  const EngineResult r = run_engine(d, engine_opt);
  FitResult out = package(d, engine_opt, r);
  // nu^2 = nu0_sq - A u^{-q} maps onto the engine's gamma = -A, offset = nu0_sq.
  out.params["A"] = -out.params.at("gamma");
  out.sigmas["A"] = out.sigmas.at("gamma");
  out.params["nu0_sq"] = out.params.at("offset");
  out.sigmas["nu0_sq"] = out.sigmas.at("offset");
  out.params.erase("gamma");
  out.sigmas.erase("gamma");
  out.params.erase("offset");
  out.sigmas.erase("offset");
  return out;
}

ResidualReport residual_analysis(const std::vector<CalibrationPoint>& points, Window fit_window,
                                 Window eval_window, double q, const Geometry& geom, double beta,
                                 double v0) {
  require(std::isfinite(beta) && beta > 0.0, ErrorClass::invalid_argument,
          "actuation coefficient must be > 0");
  require(!points.empty(), ErrorClass::invalid_argument, "no points");
  std::vector<CalibrationPoint> fit_pts, eval_pts;
  for (const auto& p : points) {
    require(p.v_bias == points.front().v_bias, ErrorClass::invalid_argument,
            "residual analysis expects a constant bias");
    if (fit_window.contains(p.v_pzt)) fit_pts.push_back(p);
    if (eval_window.contains(p.v_pzt)) eval_pts.push_back(p);
  }
  require(!eval_pts.empty(), ErrorClass::invalid_argument, "evaluation window selects no points");

  PowerLawOptions opt;
  opt.q_fixed = q;
  ResidualReport report;
  report.far_fit = fit_fast_approach(fit_pts, opt);
  const double amp = report.far_fit.params.at("A");
  const double nu0_sq = report.far_fit.params.at("nu0_sq");
  const double v0_pzt = report.far_fit.params.at("V0_PZT");
  require(amp > 0.0, ErrorClass::convergence,
          "far-window fit produced a non-attractive amplitude");
  const double dv = points.front().v_bias - v0;
  require(dv != 0.0, ErrorClass::invalid_argument,
          "bias equals the minimizing potential; the amplitude carries no calibration");
  report.m_eff = effective_mass_from_gamma(amp / (dv * dv), geom, beta);

  report.rows.reserve(eval_pts.size());
  for (const auto& p : eval_pts) {
    const double u = v0_pzt - p.v_pzt;
    require(u > 0.0, ErrorClass::convergence,
            "far-window fit places contact inside the evaluation window");
    ResidualRow row;
    row.v_pzt = p.v_pzt;
    row.d = beta * u;
    row.nu_sq_residual = p.nu * p.nu - (nu0_sq - amp * std::pow(u, -q));
    report.rows.push_back(row);
  }
  std::sort(report.rows.begin(), report.rows.end(),
            [](const auto& a, const auto& b) { return a.d < b.d; });
  // Integrate the spring-constant residual inward from the farthest row
  // (anchored at zero force): F(d) = -4 pi^2 m_eff * integral_d^far r dd'.
  const double pref = 4.0 * constants::pi * constants::pi * report.m_eff;
  double acc = 0.0;
  report.rows.back().force_residual = 0.0;
  for (std::size_t j = report.rows.size() - 1; j-- > 0;) {
    const auto& hi = report.rows[j + 1];
    auto& lo = report.rows[j];
    acc += 0.5 * (lo.nu_sq_residual + hi.nu_sq_residual) * (hi.d - lo.d);
    lo.force_residual = -pref * acc;
  }
  return report;
}

double effective_mass_from_gamma(double gamma, const Geometry& geom, double beta) {
  require(std::isfinite(gamma) && gamma > 0.0, ErrorClass::domain, "gamma must be > 0");
  require(std::isfinite(beta) && beta > 0.0, ErrorClass::invalid_argument,
          "actuation coefficient must be > 0");
  geom.validate();
  require(geom.kind == GeometryKind::cylinder_plane, ErrorClass::invalid_argument,
          "effective mass extraction requires cylinder-plane geometry");
  return 3.0 * constants::epsilon0 * std::sqrt(geom.a) * geom.L_eff /
         (16.0 * std::sqrt(2.0) * constants::pi * gamma * std::pow(beta, 2.5));
}

}  // namespace cpcal::fitting
