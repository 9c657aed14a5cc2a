#include "runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "dataset.hpp"
#include "error.hpp"
#include "fitting.hpp"
#include "models.hpp"
#include "deformations.hpp"
#include "report.hpp"
#include "version.hpp"

namespace cpcal::runner {

namespace fs = std::filesystem;
using config::Config;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void bad_enum(const Config& cfg, const std::string& key, const std::string& got,
                           const std::string& allowed) {
  throw Error(ErrorClass::config,
              cfg.origin() + ": key '" + key + "': unknown value '" + got + "' (allowed: " +
                  allowed + ")");
}

std::string out_path(const std::string& out_dir, const std::string& file) {
  fs::create_directories(out_dir);
  return (fs::path(out_dir) / file).string();
}

std::string base_name(const Config& cfg, const char* fallback) {
  return cfg.get_string("output.name", fallback);
}

std::vector<double> v_pzt_grid(const Config& cfg, const synth::PiezoMap& map) {
  const bool has_gaps = cfg.has("grid.gaps");
  const bool has_list = cfg.has("grid.v_pzt");
  require(has_gaps != has_list, ErrorClass::config,
          cfg.origin() + ": exactly one of grid.gaps or grid.v_pzt is required");
  if (has_list) return cfg.get_list("grid.v_pzt");
  const config::RangeSpec r = cfg.get_range("grid.gaps");
  require(r.lo > 0 && r.hi > r.lo, ErrorClass::config,
          cfg.origin() + ": grid.gaps needs 0 < LO < HI");
  const auto gaps = synth::log_spaced(r.lo, r.hi, r.n);
  std::vector<double> v;
  v.reserve(gaps.size());
  // Approach order: start at the widest gap and move toward contact.
  for (auto it = gaps.rbegin(); it != gaps.rend(); ++it) {
    v.push_back(synth::gap_to_piezo(map, *it));
  }
  return v;
}

std::vector<double> v_bias_grid(const Config& cfg) {
  const bool has_list = cfg.has("grid.v_bias");
  const bool has_range = cfg.has("grid.v_bias_range");
  require(has_list != has_range, ErrorClass::config,
          cfg.origin() + ": exactly one of grid.v_bias or grid.v_bias_range is required");
  if (has_list) return cfg.get_list("grid.v_bias");
  const config::RangeSpec r = cfg.get_range("grid.v_bias_range");
  std::vector<double> v(r.n);
  for (std::size_t i = 0; i < r.n; ++i) {
    v[i] = r.lo + (r.hi - r.lo) * static_cast<double>(i) / static_cast<double>(r.n - 1);
  }
  return v;
}

fitting::PowerLawOptions analysis_options(const Config& cfg, bool q_free) {
  fitting::PowerLawOptions opt;
  opt.q_free = q_free;
  opt.q_fixed = cfg.get_double("analysis.q_fixed", 2.5);
  opt.offset_on = cfg.get_bool("analysis.offset", false);
  if (cfg.has("analysis.q_grid")) {
    const config::GridSpec g = cfg.get_grid("analysis.q_grid");
    opt.q_grid.q_min = g.min;
    opt.q_grid.q_max = g.max;
    opt.q_grid.step = g.step;
  }
  return opt;
}

fitting::QGrid analysis_q_grid(const Config& cfg) { return analysis_options(cfg, true).q_grid; }

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

ordered_json summary_head(const char* command, const Config& cfg) {
  ordered_json j;
  j["command"] = command;
  j["cpcal"] = kVersion;
  j["config"] = cfg.hash();
  return j;
}

report::Table curvature_table(const Config& cfg, const std::vector<CurvatureSample>& samples) {
  report::Table t;
  t.comments = report::standard_comments(cfg.hash());
  t.columns = {"V_PZT [V]",      "K_el [Hz^2 V^-2]", "sigma_K [Hz^2 V^-2]",
               "V0 [V]",         "sigma_V0 [V]",     "nu0_sq [Hz^2]"};
  for (const auto& s : samples) {
    t.rows.push_back({report::format_num(s.v_pzt), report::format_num(s.k_el),
                      report::format_num(s.sigma_k), report::format_num(s.v0),
                      report::format_num(s.sigma_v0), report::format_num(s.nu0_sq)});
  }
  return t;
}

}  // namespace

Geometry geometry_from(const Config& cfg) {
  Geometry g;
  const std::string kind = cfg.get_string("geometry.kind", "cylinder_plane");
  if (kind == "cylinder_plane") {
    g.kind = GeometryKind::cylinder_plane;
    g.a = cfg.get_double("geometry.a");
    g.L = cfg.get_double("geometry.L");
    g.L_eff = cfg.get_double("geometry.L_eff", g.L);
  } else if (kind == "sphere_plane") {
    g.kind = GeometryKind::sphere_plane;
    g.R = cfg.get_double("geometry.R");
  } else if (kind == "parallel_planes") {
    g.kind = GeometryKind::parallel_planes;
    g.S = cfg.get_double("geometry.S");
  } else {
    bad_enum(cfg, "geometry.kind", kind, "cylinder_plane, sphere_plane, parallel_planes");
  }
  g.validate();
  return g;
}

Resonator resonator_from(const Config& cfg) {
  Resonator r;
  r.m_eff = cfg.get_double("resonator.m_eff");
  r.nu0 = cfg.get_double("resonator.nu0");
  r.validate();
  return r;
}

synth::PiezoMap piezo_from(const Config& cfg) {
  synth::PiezoMap m;
  m.beta = cfg.get_double("piezo.beta");
  m.v0_pzt = cfg.get_double("piezo.v0_pzt");
  require(m.beta > 0, ErrorClass::config, cfg.origin() + ": piezo.beta must be > 0");
  return m;
}

synth::Scenario scenario_from(const Config& cfg) {
  synth::Scenario sc;
  sc.geom = geometry_from(cfg);
  sc.res = resonator_from(cfg);

  const std::string force = cfg.get_string("scenario.force", "coulomb");
  if (force == "coulomb") {
    sc.force = synth::ForceModel::pure_coulomb();
  } else if (force == "extra_power") {
    sc.force = synth::ForceModel::extra_power(cfg.get_double("scenario.alpha1"),
                                              cfg.get_double("scenario.alpha2"),
                                              cfg.get_double("scenario.p"));
  } else {
    bad_enum(cfg, "scenario.force", force, "coulomb, extra_power");
  }

  const std::string profile = cfg.get_string("scenario.v0_profile", "constant");
  if (profile == "constant") {
    sc.v0 = synth::V0Profile::constant(cfg.get_double("scenario.v0"));
  } else if (profile == "linear") {
    sc.v0 = synth::V0Profile::linear(cfg.get_double("scenario.v0_far"),
                                     cfg.get_double("scenario.v0_slope"));
  } else if (profile == "saturating") {
    sc.v0 = synth::V0Profile::saturating(cfg.get_double("scenario.v0_far"),
                                         cfg.get_double("scenario.v0_near"),
                                         cfg.get_double("scenario.d_knee"));
  } else {
    bad_enum(cfg, "scenario.v0_profile", profile, "constant, linear, saturating");
  }

  sc.noise.sigma_nu = cfg.get_double("scenario.sigma_nu", 0.0);
  sc.noise.sigma_nu_rel = cfg.get_double("scenario.sigma_nu_rel", 0.0);
  sc.noise.v0_sigma = cfg.get_double("scenario.v0_sigma", 0.0);
  sc.noise.kel_drift_frac = cfg.get_double("scenario.kel_drift_frac", 0.0);
  sc.noise.nu0_ramp = cfg.get_double("scenario.nu0_ramp", 0.0);
  sc.noise.seed = cfg.get_uint("scenario.seed", 0);
  sc.validate();
  return sc;
}

Deformation deformation_from(const Config& cfg) {
  Deformation def;
  const std::string shape = cfg.get_string("deformation.shape");
  if (shape == "flat_facet") {
    def.kind = DeformationKind::flat_facet;
    def.b = cfg.get_double("deformation.b");
  } else if (shape == "triangular_tip") {
    def.kind = DeformationKind::triangular_tip;
    def.b = cfg.get_double("deformation.b");
    def.b_prime = cfg.get_double("deformation.b_prime", def.b);
  } else {
    bad_enum(cfg, "deformation.shape", shape, "flat_facet, triangular_tip");
  }
  def.validate();
  return def;
}

patches::PatchSpectrum spectrum_from(const Config& cfg) {
  const std::string kind = cfg.get_string("patches.spectrum");
  if (kind == "flat_band") {
    return patches::PatchSpectrum::make_flat_band(cfg.get_double("patches.k_min"),
                                                  cfg.get_double("patches.k_max"),
                                                  cfg.get_double("patches.amplitude"));
  }
  if (kind == "gaussian_band") {
    return patches::PatchSpectrum::make_gaussian_band(cfg.get_double("patches.k_min"),
                                                      cfg.get_double("patches.k_max"),
                                                      cfg.get_double("patches.amplitude"));
  }
  if (kind == "tabulated") {
    return patches::PatchSpectrum::load(cfg.get_string("patches.file"));
  }
  bad_enum(cfg, "patches.spectrum", kind, "flat_band, gaussian_band, tabulated");
}

std::string veq_table_text(double d) {
  require(d > 0 && std::isfinite(d), ErrorClass::domain, "distance must be > 0");
  // Reference dimensions for the force columns (the equivalent voltage does
  // not depend on them): sphere R = 150 um, cylinder a = 12 mm with
  // L_eff = 4 mm, plates S = 1 mm^2.
  Geometry sphere;
  sphere.kind = GeometryKind::sphere_plane;
  sphere.R = 150e-6;
  Geometry cylinder;
  cylinder.kind = GeometryKind::cylinder_plane;
  cylinder.a = 12e-3;
  cylinder.L = 4e-3;
  cylinder.L_eff = 4e-3;
  Geometry plates;
  plates.kind = GeometryKind::parallel_planes;
  plates.S = 1e-6;

  std::ostringstream out;
  out << "# cpcal " << kVersion << "\n";
  out << "# equivalent Casimir voltage at d = " << report::format_num(d) << " m\n";
  out << "# force columns use reference dimensions: sphere R = 150 um, "
         "cylinder a = 12 mm / L_eff = 4 mm, plates S = 1 mm^2\n";
  out << "geometry, V_eq [V], F_casimir [N], F_coulomb(V_eq) [N]\n";
  const struct {
    const char* name;
    const Geometry* geom;
  } rows[] = {{"sphere_plane", &sphere}, {"cylinder_plane", &cylinder},
              {"parallel_planes", &plates}};
  for (const auto& row : rows) {
    const double veq = models::equivalent_casimir_voltage(row.geom->kind, d);
    out << row.name << ", " << report::format_num(veq) << ", "
        << report::format_num(models::casimir_force_ideal(*row.geom, d)) << ", "
        << report::format_num(models::coulomb_force_pfa(*row.geom, d, veq)) << "\n";
  }
  return out.str();
}

std::string run_generate(const Config& cfg, const std::string& out_dir) {
  const synth::Scenario sc = scenario_from(cfg);
  const synth::PiezoMap map = piezo_from(cfg);
  const auto v_pzt = v_pzt_grid(cfg, map);
  const auto v_bias = v_bias_grid(cfg);
  const auto run_id = static_cast<std::int64_t>(cfg.get_uint("grid.run_id", 0));
  const auto points = synth::generate_calibration_run(sc, map, v_pzt, v_bias, run_id);

  auto comments = report::standard_comments(cfg.hash(), sc.noise.seed);
  comments.push_back("units: V_PZT [V], V_bias [V], nu [Hz], sigma_nu [Hz]");
  const std::string path = out_path(out_dir, base_name(cfg, "dataset") + ".csv");
  write_calibration_csv(path, points, comments);

  ordered_json j = summary_head("generate", cfg);
  j["seed"] = sc.noise.seed;
  j["points"] = points.size();
  j["outputs"] = {path};
  return dump(j);
}

std::string run_fit(const Config& cfg, const std::string& dataset_path,
                    const std::string& out_dir) {
  const auto points = read_calibration_csv(dataset_path);
  const std::string mode = cfg.get_string("analysis.mode", "curvature");
  const std::string name = base_name(cfg, "result");
  const fitting::PowerLawOptions fixed = analysis_options(cfg, false);
  const fitting::PowerLawOptions free_q = analysis_options(cfg, true);

  fitting::FitResult f_fixed, f_free;
  std::vector<std::string> outputs;
  if (mode == "curvature") {
    const auto samples = fitting::fit_all_parabolas(points);
    const std::string samples_path = out_path(out_dir, name + "_curvature.csv");
    report::write_table(samples_path, curvature_table(cfg, samples));
    outputs.push_back(samples_path);
    f_fixed = fitting::fit_curvature_powerlaw(samples, fixed);
    f_free = fitting::fit_curvature_powerlaw(samples, free_q);
  } else if (mode == "fast_approach") {
    f_fixed = fitting::fit_fast_approach(points, fixed);
    f_free = fitting::fit_fast_approach(points, free_q);
  } else {
    bad_enum(cfg, "analysis.mode", mode, "curvature, fast_approach");
  }

  ordered_json rep;
  rep["cpcal"] = kVersion;
  rep["config"] = cfg.hash();
  rep["mode"] = mode;
  rep["dataset"] = dataset_path;
  rep["fixed_q"] = report::fit_to_json(f_fixed);
  rep["free_q"] = report::fit_to_json(f_free);

  // Implied effective mass from the fixed-exponent amplitude: the usual
  // product of a calibration. Only meaningful for the 2.5-exponent
  // cylinder-plane model, and (in fast-approach mode) only when the
  // minimizing potential is known so the amplitude converts to a curvature.
  if (fixed.q_fixed == 2.5 && cfg.has("geometry.a") && cfg.has("piezo.beta")) {
    const Geometry geom = geometry_from(cfg);
    if (geom.kind == GeometryKind::cylinder_plane) {
      double gamma = std::numeric_limits<double>::quiet_NaN();
      if (mode == "curvature") {
        gamma = f_fixed.params.at("gamma");
      } else if (cfg.has("scenario.v0")) {
        const double dv = points.front().v_bias - cfg.get_double("scenario.v0");
        if (dv != 0.0) gamma = f_fixed.params.at("A") / (dv * dv);
      }
      if (std::isfinite(gamma) && gamma > 0.0) {
        rep["m_eff_implied"] =
            fitting::effective_mass_from_gamma(gamma, geom, piezo_from(cfg).beta);
      }
    }
  }
  const std::string fit_path = out_path(out_dir, name + "_fit.json");
  report::write_json(fit_path, rep);
  outputs.push_back(fit_path);

  ordered_json j = summary_head("fit", cfg);
  j["mode"] = mode;
  j["q"] = f_free.params.at("q");
  j["sigma_q"] = f_free.sigmas.at("q");
  if (rep.contains("m_eff_implied")) j["m_eff_implied"] = rep["m_eff_implied"];
  j["outputs"] = outputs;
  return dump(j);
}

std::string run_scan(const Config& cfg, const std::string& dataset_path,
                     const std::string& out_dir) {
  const std::string mode = cfg.get_string("analysis.mode", "curvature");
  require(mode == "curvature", ErrorClass::config,
          cfg.origin() + ": scan requires a curvature dataset (analysis.mode = curvature)");
  const auto points = read_calibration_csv(dataset_path);
  const auto samples = fitting::fit_all_parabolas(points);
  const std::string name = base_name(cfg, "result");
  const fitting::QGrid grid = analysis_q_grid(cfg);
  const bool offset_on = cfg.get_bool("analysis.offset", false);
  const synth::PiezoMap map = piezo_from(cfg);

  const fitting::ExponentScan scan = fitting::exponent_chi2_scan(samples, grid, offset_on);
  report::Table et;
  et.comments = report::standard_comments(cfg.hash());
  et.comments.push_back("q_min " + report::format_num(scan.q_min));
  et.comments.push_back(std::string("plateau ") + (scan.plateau ? "true" : "false"));
  et.columns = {"q [1]", "reduced_chi2 [1]"};
  for (const auto& p : scan.points) {
    et.rows.push_back({report::format_num(p.q), report::format_num(p.reduced_chi2)});
  }
  const std::string exp_path = out_path(out_dir, name + "_exponent_scan.csv");
  report::write_table(exp_path, et);

  const fitting::TruncationScan trunc = fitting::truncation_scan(samples, map.beta, grid);
  report::Table tt;
  tt.comments = report::standard_comments(cfg.hash());
  tt.comments.push_back("v0_pzt_ref " + report::format_num(trunc.v0_pzt_ref) +
                        " V (full-set fixed-2.5 fit; d_min and d0_fit are relative to it)");
  tt.comments.push_back(
      "d0_fit is the contact-distance offset of the constrained model"
      " K = gamma (d - d0)^-2.5; d0_fit > 0 means the fit places contact"
      " deeper than the reference calibration");
  tt.columns = {"n_removed [1]",       "n_retained [1]",
                "d_min [m]",           "q_opt [1]",
                "sigma_q [1]",         "v0_pzt_free [V]",
                "gamma_q25 [Hz^2 V^0.5]", "sigma_gamma_q25 [Hz^2 V^0.5]",
                "v0_pzt_q25 [V]",      "sigma_v0_pzt_q25 [V]",
                "d0_fit [m]",          "sigma_d0_fit [m]"};
  for (const auto& r : trunc.rows) {
    const double d0 = map.beta * (trunc.v0_pzt_ref - r.v0_pzt_q25);
    const double sigma_d0 = map.beta * r.sigma_v0_pzt_q25;
    tt.rows.push_back({report::format_num(static_cast<double>(r.n_removed)),
                       report::format_num(static_cast<double>(r.n_retained)),
                       report::format_num(r.d_min), report::format_num(r.q_opt),
                       report::format_num(r.sigma_q), report::format_num(r.v0_pzt_free),
                       report::format_num(r.gamma_q25), report::format_num(r.sigma_gamma_q25),
                       report::format_num(r.v0_pzt_q25), report::format_num(r.sigma_v0_pzt_q25),
                       report::format_num(d0), report::format_num(sigma_d0)});
  }
  const std::string trunc_path = out_path(out_dir, name + "_truncation_scan.csv");
  report::write_table(trunc_path, tt);

  ordered_json j = summary_head("scan", cfg);
  j["q_min"] = scan.q_min;
  j["plateau"] = scan.plateau;
  j["truncation_levels"] = trunc.rows.size();
  j["outputs"] = {exp_path, trunc_path};
  return dump(j);
}

std::string run_residuals(const Config& cfg, const std::string& dataset_path,
                          const std::string& out_dir) {
  const auto points = read_calibration_csv(dataset_path);
  const Geometry geom = geometry_from(cfg);
  const synth::PiezoMap map = piezo_from(cfg);
  const config::WindowSpec fw = cfg.get_window("analysis.fit_window");
  const config::WindowSpec ew = cfg.get_window("analysis.eval_window");
  const double q = cfg.get_double("analysis.q_fixed", 2.5);
  const double v0 = cfg.get_double("scenario.v0");
  const std::string name = base_name(cfg, "result");

  const fitting::ResidualReport rep = fitting::residual_analysis(
      points, fitting::Window{fw.lo, fw.hi}, fitting::Window{ew.lo, ew.hi}, q, geom, map.beta,
      v0);

  report::Table t;
  t.comments = report::standard_comments(cfg.hash());
  t.comments.push_back("m_eff " + report::format_num(rep.m_eff) + " kg (from far-window fit)");
  t.columns = {"V_PZT [V]", "d [m]", "nu_sq_residual [Hz^2]", "force_residual [N]"};
  for (const auto& r : rep.rows) {
    t.rows.push_back({report::format_num(r.v_pzt), report::format_num(r.d),
                      report::format_num(r.nu_sq_residual),
                      report::format_num(r.force_residual)});
  }
  const std::string table_path = out_path(out_dir, name + "_residuals.csv");
  report::write_table(table_path, t);

  ordered_json jr;
  jr["cpcal"] = kVersion;
  jr["config"] = cfg.hash();
  jr["dataset"] = dataset_path;
  jr["far_fit"] = report::fit_to_json(rep.far_fit);
  jr["m_eff"] = rep.m_eff;
  const std::string json_path = out_path(out_dir, name + "_residuals.json");
  report::write_json(json_path, jr);

  ordered_json j = summary_head("residuals", cfg);
  j["m_eff"] = rep.m_eff;
  j["rows"] = rep.rows.size();
  j["outputs"] = {table_path, json_path};
  return dump(j);
}

std::string run_deformation(const Config& cfg, const std::string& out_dir) {
  const Geometry geom = geometry_from(cfg);
  const Resonator res = resonator_from(cfg);
  const Deformation def = deformation_from(cfg);
  config::RangeSpec r{5e-7, 2e-6, 50};
  if (cfg.has("deformation.fit_range")) r = cfg.get_range("deformation.fit_range");
  require(r.lo > 0 && r.hi > r.lo, ErrorClass::config,
          cfg.origin() + ": deformation.fit_range needs 0 < LO < HI");

  const double B = deformations::deformation_exponent(def, geom, res, r.lo, r.hi,
                                                      static_cast<int>(r.n));

  report::Table t;
  t.comments = report::standard_comments(cfg.hash());
  t.comments.push_back("undeformed cylinder reference exponent: 2.5");
  t.columns = {"shape", "b [m]", "b_prime [m]", "d_lo [m]", "d_hi [m]", "n_points [1]", "B [1]"};
  t.rows.push_back({def.kind == DeformationKind::flat_facet ? "flat_facet" : "triangular_tip",
                    report::format_num(def.b), report::format_num(def.b_prime),
                    report::format_num(r.lo), report::format_num(r.hi),
                    report::format_num(static_cast<double>(r.n)), report::format_num(B)});
  const std::string path = out_path(out_dir, base_name(cfg, "result") + "_deformation.csv");
  report::write_table(path, t);

  ordered_json j = summary_head("deformation", cfg);
  j["B"] = B;
  j["outputs"] = {path};
  return dump(j);
}

std::string run_patches(const Config& cfg, const std::string& out_dir) {
  const Geometry geom = geometry_from(cfg);
  const patches::PatchSpectrum spec = spectrum_from(cfg);
  const config::RangeSpec r = cfg.get_range("patches.d_range");
  require(r.lo > 0 && r.hi > r.lo, ErrorClass::config,
          cfg.origin() + ": patches.d_range needs 0 < LO < HI");
  const double vrms = patches::v_rms(spec);

  report::Table t;
  t.comments = report::standard_comments(cfg.hash());
  t.comments.push_back("v_rms " + report::format_num(vrms) + " V");
  t.columns = {"d [m]", "energy_pp [J m^-2]", "force_cp [N]", "force_large_patch [N]",
               "suppression [1]"};
  for (const double d : synth::log_spaced(r.lo, r.hi, r.n)) {
    const double f = patches::patch_force_cp(spec, geom, d);
    const double f_large = patches::patch_force_cp_large_limit(geom, d, vrms);
    t.rows.push_back({report::format_num(d), report::format_num(patches::patch_energy_pp(spec, d)),
                      report::format_num(f), report::format_num(f_large),
                      report::format_num(f / f_large)});
  }
  const std::string path = out_path(out_dir, base_name(cfg, "result") + "_patches.csv");
  report::write_table(path, t);

  ordered_json j = summary_head("patches", cfg);
  j["v_rms"] = vrms;
  j["outputs"] = {path};
  return dump(j);
}

}  // namespace cpcal::runner
