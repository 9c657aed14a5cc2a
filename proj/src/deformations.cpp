#include "deformations.hpp"

#include <cmath>
#include <vector>

#include "constants.hpp"

namespace cpcal::deformations {

namespace {

using constants::epsilon0;
using constants::pi;

// Series branch of f_inc around x = 0 in the variable t = 2a x / b^2:
// f_inc = (2a/b) sum_{n>=0} (-t)^n / (2n+1), valid for |t| < 1, used for
// |t| <= 1e-3 where it converges to full double precision in a few terms.
constexpr double kSeriesT = 1e-3;

double f_inc_series(double t, double a, double b) {
  double sum = 0.0;
  double pow_t = 1.0;
  for (int n = 0; n < 12; ++n) {
    sum += pow_t / (2 * n + 1);
    pow_t *= -t;
    if (std::abs(pow_t) < 1e-20) break;
  }
  return 2.0 * a / b * sum;
}

// Second derivative of profile_f_inc with respect to its argument by central
// differences with Richardson extrapolation, step h relative to the outer gap.
double f_inc_second_derivative(double x, double a, double b, double h) {
  const double x_min = -b * b / (2.0 * a);
  if (x - h <= x_min) h = 0.25 * (x - x_min);
  const auto central = [&](double step) {
    return (profile_f_inc(x + step, a, b) - 2.0 * profile_f_inc(x, a, b) +
            profile_f_inc(x - step, a, b)) /
           (step * step);
  };
  const double d_h = central(h);
  const double d_h2 = central(0.5 * h);
  return (4.0 * d_h2 - d_h) / 3.0;
}

double composite_second_derivative(const Deformation& def, const Geometry& geom, double d) {
  const double h = 1e-4 * d;
  if (def.kind == DeformationKind::flat_facet) {
    const double s = def.b * def.b / (2.0 * geom.a);
    return f_inc_second_derivative(d - s, geom.a, def.b, h) + 2.0 * def.b / (d * d * d);
  }
  const double bp = def.b_prime;
  const double tip_dd = def.b * (2.0 * d + bp) / (d * d * (d + bp) * (d + bp));
  return f_inc_second_derivative(d + bp, geom.a, def.b, h) + tip_dd;
}

}  // namespace

double profile_f_inc(double x, double a, double b) {
  require(a > 0 && b > 0, ErrorClass::invalid_argument, "profile_f_inc requires a, b > 0");
  const double t = 2.0 * a * x / (b * b);
  require(t > -1.0, ErrorClass::domain, "profile_f_inc argument at or below -b^2/(2a)");
  if (std::abs(t) <= kSeriesT) return f_inc_series(t, a, b);
  if (x > 0) return std::sqrt(2.0 * a / x) * std::atan(std::sqrt(2.0 * a * x) / b);
  const double xm = -x;
  return std::sqrt(2.0 * a / xm) * std::atanh(std::sqrt(2.0 * a * xm) / b);
}

double profile_f_flat(double d, double b) {
  require(d > 0, ErrorClass::domain, "profile_f_flat requires d > 0");
  require(b > 0, ErrorClass::invalid_argument, "profile_f_flat requires b > 0");
  return b / d;
}

double profile_f_tip(double d, double b, double b_prime) {
  require(d > 0, ErrorClass::domain, "profile_f_tip requires d > 0");
  require(b > 0 && b_prime > 0, ErrorClass::invalid_argument,
          "profile_f_tip requires b, b_prime > 0");
  return b / b_prime * std::log1p(b_prime / d);
}

double deformed_freq_shift(const Deformation& def, const Geometry& geom, const Resonator& res,
                           double d, double dV) {
  def.validate();
  geom.validate();
  res.validate();
  require(d > 0, ErrorClass::domain, "deformed_freq_shift requires d > 0");
  const double pref = epsilon0 * geom.L_eff * dV * dV / (4.0 * pi * pi * res.m_eff);
  return -pref * composite_second_derivative(def, geom, d);
}

double deformation_exponent(const Deformation& def, const Geometry& geom, const Resonator& res,
                            double d_lo, double d_hi, int n_points) {
  require(n_points >= 3, ErrorClass::invalid_argument, "deformation_exponent needs >= 3 points");
  require(d_lo > 0 && d_hi > d_lo, ErrorClass::domain,
          "deformation_exponent requires 0 < d_lo < d_hi");
  // The exponent of |shift| = A/d^B does not depend on the bias, so a unit
  // bias is used for sampling.
  std::vector<double> lx(n_points), ly(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double d = d_lo * std::pow(d_hi / d_lo, static_cast<double>(i) / (n_points - 1));
    const double shift = deformed_freq_shift(def, geom, res, d, 1.0);
    require(shift != 0.0, ErrorClass::convergence, "deformation_exponent: vanishing shift");
    lx[i] = std::log(d);
    ly[i] = std::log(std::abs(shift));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n_points; ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double n = n_points;
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return -slope;
}

}  // namespace cpcal::deformations
