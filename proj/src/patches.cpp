#include "patches.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "constants.hpp"
#include "error.hpp"
#include "models.hpp"

namespace cpcal::patches {
namespace {

constexpr double kRelTol = 1e-8;     // quadrature target, relative
constexpr double kSmallArg = 1e-8;   // below k*d = kSmallArg use the k->0 kernel limits

// k^2 e^{-kd}/sinh(kd) rewritten as 2 k^2 e^{-2kd}/(1 - e^{-2kd}) so large k*d
// cannot overflow sinh; -> k/d as k*d -> 0.
double kernel_pp(double k, double d) {
  const double kd = k * d;
  if (kd < kSmallArg) return k / d;
  return 2.0 * k * k * std::exp(-2.0 * kd) / (-std::expm1(-2.0 * kd));
}

// k^3 e^{-2kd}/sinh^2(kd) = 4 k^3 e^{-4kd}/(1 - e^{-2kd})^2; -> k/d^2 as k*d -> 0.
double kernel_cp(double k, double d) {
  const double kd = k * d;
  if (kd < kSmallArg) return k / (d * d);
  const double em = -std::expm1(-2.0 * kd);
  return 4.0 * k * k * k * std::exp(-4.0 * kd) / (em * em);
}

// Segment edges where the integrand may lose smoothness: band edges for the
// analytic kinds, every node for tabulated data.
std::vector<double> breakpoints(const PatchSpectrum& spec) {
  if (spec.kind == SpectrumKind::tabulated) {
    std::vector<double> edges;
    edges.reserve(spec.table.size());
    for (const auto& [k, s] : spec.table) {
      (void)s;
      edges.push_back(k);
    }
    return edges;
  }
  return {spec.k_min, spec.k_max};
}

// Adaptive Gauss-Kronrod over the spectrum support, piecewise between
// breakpoints, upper limit clamped to k_cut. The support is always bounded,
// so with k_cut = max(50/d, 10 k_max) the clamp is dormant; it is applied
// anyway so the contract holds if a cut below the support edge is requested.
template <typename Kernel>
double integrate_weighted(const PatchSpectrum& spec, double k_cut, Kernel&& kernel) {
  const std::vector<double> edges = breakpoints(spec);
  double total = 0.0;
  double total_err = 0.0;
  double total_l1 = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double lo = edges[i];
    const double hi = std::min(edges[i + 1], k_cut);
    if (hi <= lo) break;
    double err = 0.0;
    double l1 = 0.0;
    auto f = [&](double k) { return kernel(k) * spec.value(k); };
    total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, lo, hi, 15, kRelTol, &err, &l1);
    total_err += err;
    total_l1 += l1;
  }
  require(total_err <= kRelTol * (total_l1 + 1e-300), ErrorClass::quadrature,
          "patch spectrum quadrature did not reach the requested tolerance");
  return total;
}

double cut_wavenumber(const PatchSpectrum& spec, double d) {
  const double k_hi =
      spec.kind == SpectrumKind::tabulated ? spec.table.back().first : spec.k_max;
  return std::max(50.0 / d, 10.0 * k_hi);
}

}  // namespace

PatchSpectrum PatchSpectrum::make_flat_band(double k_min, double k_max, double amplitude) {
  PatchSpectrum s;
  s.kind = SpectrumKind::flat_band;
  s.k_min = k_min;
  s.k_max = k_max;
  s.amplitude = amplitude;
  s.validate();
  return s;
}

PatchSpectrum PatchSpectrum::make_gaussian_band(double k_min, double k_max, double amplitude) {
  PatchSpectrum s;
  s.kind = SpectrumKind::gaussian_band;
  s.k_min = k_min;
  s.k_max = k_max;
  s.amplitude = amplitude;
  s.validate();
  return s;
}

PatchSpectrum PatchSpectrum::make_tabulated(std::vector<std::pair<double, double>> rows) {
  PatchSpectrum s;
  s.kind = SpectrumKind::tabulated;
  s.table = std::move(rows);
  if (!s.table.empty()) {
    s.k_min = s.table.front().first;
    s.k_max = s.table.back().first;
  }
  s.validate();
  return s;
}

PatchSpectrum PatchSpectrum::load(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorClass::io, "cannot open spectrum file: " + path);
  std::vector<std::pair<double, double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream fields(line);
    double k = 0;
    double s = 0;
    if (!(fields >> k)) continue;  // blank or comment-only line
    std::string extra;
    require(static_cast<bool>(fields >> s) && !(fields >> extra), ErrorClass::io,
            path + ":" + std::to_string(line_no) +
                ": expected two numeric columns (k [1/m], S [V^2 m^2])");
    rows.emplace_back(k, s);
  }
  try {
    return make_tabulated(std::move(rows));
  } catch (const Error& e) {
    throw Error(e.cls(), path + ": " + e.what());
  }
}

double PatchSpectrum::value(double k) const {
  switch (kind) {
    case SpectrumKind::flat_band:
      return (k >= k_min && k <= k_max) ? amplitude : 0.0;
    case SpectrumKind::gaussian_band: {
      if (k < k_min || k > k_max) return 0.0;
      const double kc = 0.5 * (k_min + k_max);
      const double sigma = (k_max - k_min) / 6.0;
      const double t = (k - kc) / sigma;
      return amplitude * std::exp(-0.5 * t * t);
    }
    case SpectrumKind::tabulated: {
      if (table.empty() || k < table.front().first || k > table.back().first) return 0.0;
      auto it = std::upper_bound(table.begin(), table.end(), k,
                                 [](double x, const auto& row) { return x < row.first; });
      if (it == table.begin()) return table.front().second;
      if (it == table.end()) return table.back().second;
      const auto& [k1, s1] = *(it - 1);
      const auto& [k2, s2] = *it;
      return s1 + (s2 - s1) * (k - k1) / (k2 - k1);
    }
  }
  throw Error(ErrorClass::invalid_argument, "unknown spectrum kind");
}

void PatchSpectrum::validate() const {
  if (kind == SpectrumKind::tabulated) {
    require(table.size() >= 2, ErrorClass::invalid_argument,
            "tabulated spectrum needs at least two rows");
    require(table.front().first >= 0.0, ErrorClass::invalid_argument,
            "tabulated spectrum wavenumbers must be >= 0");
    for (std::size_t i = 0; i < table.size(); ++i) {
      const auto& [k, s] = table[i];
      require(std::isfinite(k) && std::isfinite(s), ErrorClass::invalid_argument,
              "tabulated spectrum entries must be finite");
      require(s >= 0.0, ErrorClass::invalid_argument,
              "tabulated spectrum values must be >= 0");
      require(i == 0 || table[i - 1].first < k, ErrorClass::invalid_argument,
              "tabulated spectrum wavenumbers must be strictly increasing");
    }
    return;
  }
  require(std::isfinite(k_min) && std::isfinite(k_max) && std::isfinite(amplitude),
          ErrorClass::invalid_argument, "spectrum band parameters must be finite");
  require(k_min >= 0.0, ErrorClass::invalid_argument, "spectrum band requires k_min >= 0");
  require(k_max > k_min, ErrorClass::invalid_argument, "spectrum band requires k_max > k_min");
  require(amplitude >= 0.0, ErrorClass::invalid_argument,
          "spectrum band requires amplitude >= 0");
}

double v_rms(const PatchSpectrum& spec) {
  spec.validate();
  if (spec.kind == SpectrumKind::flat_band) {
    return std::sqrt(0.5 * spec.amplitude * (spec.k_max * spec.k_max - spec.k_min * spec.k_min));
  }
  const double msq = integrate_weighted(
      spec, std::numeric_limits<double>::infinity(), [](double k) { return k; });
  return std::sqrt(msq);
}

double patch_energy_pp(const PatchSpectrum& spec, double d) {
  spec.validate();
  require(d > 0.0 && std::isfinite(d), ErrorClass::domain, "gap must be > 0");
  const double integral = integrate_weighted(
      spec, cut_wavenumber(spec, d), [d](double k) { return kernel_pp(k, d); });
  return 0.5 * constants::epsilon0 * integral;
}

double patch_force_cp(const PatchSpectrum& spec, const Geometry& geom, double d) {
  spec.validate();
  geom.validate();
  require(geom.kind == GeometryKind::cylinder_plane, ErrorClass::invalid_argument,
          "patch force requires cylinder-plane geometry");
  require(d > 0.0 && std::isfinite(d), ErrorClass::domain, "gap must be > 0");
  const double integral = integrate_weighted(
      spec, cut_wavenumber(spec, d), [d](double k) { return kernel_cp(k, d); });
  const double prefactor = constants::pi * constants::epsilon0 * geom.L /
                           (2.0 * std::sqrt(2.0)) * geom.a * std::sqrt(d / geom.a);
  return prefactor * integral;
}

double patch_force_cp_large_limit(const Geometry& geom, double d, double v_rms) {
  // Same expression as the PFA Coulomb force at bias v_rms, so delegate to it.
  return models::coulomb_force_cylinder_pfa(geom, d, v_rms);
}

}  // namespace cpcal::patches
