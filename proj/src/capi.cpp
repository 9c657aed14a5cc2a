#include "cpcal/cpcal.h"

#include <cstring>
#include <new>
#include <string>
#include <vector>

#include "config.hpp"
#include "dataset.hpp"
#include "deformations.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "models.hpp"
#include "patches.hpp"
#include "runner.hpp"
#include "version.hpp"

using namespace cpcal;

extern "C" {
struct cpcal_spectrum {
  patches::PatchSpectrum spec;
};
struct cpcal_dataset {
  std::vector<CalibrationPoint> points;
};
}

namespace {

thread_local std::string g_last_error;

cpcal_status status_of(ErrorClass cls) {
  switch (cls) {
    case ErrorClass::invalid_argument: return CPCAL_EINVAL;
    case ErrorClass::domain: return CPCAL_EDOMAIN;
    case ErrorClass::config: return CPCAL_ECONFIG;
    case ErrorClass::io: return CPCAL_EIO;
    case ErrorClass::convergence: return CPCAL_ECONVERGENCE;
    case ErrorClass::contact: return CPCAL_ECONTACT;
    case ErrorClass::quadrature: return CPCAL_EQUADRATURE;
  }
  return CPCAL_EINTERNAL;
}

// Runs fn, routing exceptions into status codes + the thread-local message.
template <typename Fn>
cpcal_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return CPCAL_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.cls());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CPCAL_EINTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CPCAL_EINTERNAL;
  }
}

void check_out(const void* p) {
  require(p != nullptr, ErrorClass::invalid_argument, "output pointer must not be NULL");
}

void check_ptr(const void* p, const char* name) {
  require(p != nullptr, ErrorClass::invalid_argument,
          std::string(name) + " must not be NULL");
}

Geometry to_geometry(const cpcal_geometry* g) {
  check_ptr(g, "geometry");
  Geometry out;
  switch (g->kind) {
    case CPCAL_GEOM_SPHERE_PLANE: out.kind = GeometryKind::sphere_plane; break;
    case CPCAL_GEOM_CYLINDER_PLANE: out.kind = GeometryKind::cylinder_plane; break;
    case CPCAL_GEOM_PARALLEL_PLANES: out.kind = GeometryKind::parallel_planes; break;
    default:
      throw Error(ErrorClass::invalid_argument,
                  "unknown geometry kind " + std::to_string(g->kind));
  }
  out.a = g->a;
  out.L = g->L;
  out.L_eff = g->L_eff;
  out.R = g->R;
  out.S = g->S;
  return out;
}

GeometryKind to_geometry_kind(int kind) {
  cpcal_geometry g{};
  g.kind = kind;
  g.a = g.L = g.L_eff = g.R = g.S = 1.0;  // placeholder dims; only the kind is used
  return to_geometry(&g).kind;
}

Resonator to_resonator(const cpcal_resonator* r) {
  check_ptr(r, "resonator");
  Resonator out;
  out.m_eff = r->m_eff;
  out.nu0 = r->nu0;
  return out;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* cpcal_version(void) { return kVersion; }

const char* cpcal_last_error(void) { return g_last_error.c_str(); }

const char* cpcal_status_name(cpcal_status status) {
  switch (status) {
    case CPCAL_OK: return "ok";
    case CPCAL_EINVAL: return "invalid_argument";
    case CPCAL_EDOMAIN: return "domain";
    case CPCAL_ECONFIG: return "config";
    case CPCAL_EIO: return "io";
    case CPCAL_ECONVERGENCE: return "convergence";
    case CPCAL_ECONTACT: return "contact";
    case CPCAL_EQUADRATURE: return "quadrature";
    case CPCAL_EINTERNAL: return "internal";
  }
  return "unknown";
}

void cpcal_string_free(char* s) { delete[] s; }

cpcal_status cpcal_coulomb_force_cylinder_exact(const cpcal_geometry* geom, double d, double V,
                                                double* out) {
  return guarded([&] {
    check_out(out);
    *out = models::coulomb_force_cylinder_exact(to_geometry(geom), d, V);
  });
}

cpcal_status cpcal_coulomb_force_cylinder_pfa(const cpcal_geometry* geom, double d, double V,
                                              double* out) {
  return guarded([&] {
    check_out(out);
    *out = models::coulomb_force_cylinder_pfa(to_geometry(geom), d, V);
  });
}

cpcal_status cpcal_casimir_force_ideal(const cpcal_geometry* geom, double d, double* out) {
  return guarded([&] {
    check_out(out);
    *out = models::casimir_force_ideal(to_geometry(geom), d);
  });
}

cpcal_status cpcal_coulomb_force_pfa(const cpcal_geometry* geom, double d, double V,
                                     double* out) {
  return guarded([&] {
    check_out(out);
    *out = models::coulomb_force_pfa(to_geometry(geom), d, V);
  });
}

cpcal_status cpcal_equivalent_casimir_voltage(int geometry_kind, double d, double* out) {
  return guarded([&] {
    check_out(out);
    *out = models::equivalent_casimir_voltage(to_geometry_kind(geometry_kind), d);
  });
}

cpcal_status cpcal_electrostatic_freq_shift(const cpcal_geometry* geom,
                                            const cpcal_resonator* res, double d, double V,
                                            double V0, double alpha, double* out) {
  return guarded([&] {
    check_out(out);
    *out = models::electrostatic_freq_shift(to_geometry(geom), to_resonator(res), d, V, V0,
                                            alpha);
  });
}

cpcal_status cpcal_curvature_coefficient(const cpcal_geometry* geom, const cpcal_resonator* res,
                                         double d, double* out) {
  return guarded([&] {
    check_out(out);
    *out = models::curvature_coefficient(to_geometry(geom), to_resonator(res), d);
  });
}

cpcal_status cpcal_deformation_exponent(int shape_kind, double b, double b_prime,
                                        const cpcal_geometry* geom, const cpcal_resonator* res,
                                        double d_lo, double d_hi, int n_points, double* out) {
  return guarded([&] {
    check_out(out);
    Deformation def;
    switch (shape_kind) {
      case CPCAL_SHAPE_FLAT_FACET: def.kind = DeformationKind::flat_facet; break;
      case CPCAL_SHAPE_TRIANGULAR_TIP: def.kind = DeformationKind::triangular_tip; break;
      default:
        throw Error(ErrorClass::invalid_argument,
                    "unknown deformation shape " + std::to_string(shape_kind));
    }
    def.b = b;
    def.b_prime = b_prime;
    def.validate();
    *out = deformations::deformation_exponent(def, to_geometry(geom), to_resonator(res), d_lo,
                                              d_hi, n_points);
  });
}

cpcal_status cpcal_spectrum_flat_band(double k_min, double k_max, double amplitude,
                                      cpcal_spectrum** out) {
  return guarded([&] {
    check_out(out);
    *out = new cpcal_spectrum{patches::PatchSpectrum::make_flat_band(k_min, k_max, amplitude)};
  });
}

cpcal_status cpcal_spectrum_gaussian_band(double k_min, double k_max, double amplitude,
                                          cpcal_spectrum** out) {
  return guarded([&] {
    check_out(out);
    *out =
        new cpcal_spectrum{patches::PatchSpectrum::make_gaussian_band(k_min, k_max, amplitude)};
  });
}

cpcal_status cpcal_spectrum_load(const char* path, cpcal_spectrum** out) {
  return guarded([&] {
    check_out(out);
    check_ptr(path, "path");
    *out = new cpcal_spectrum{patches::PatchSpectrum::load(path)};
  });
}

void cpcal_spectrum_free(cpcal_spectrum* spec) { delete spec; }

cpcal_status cpcal_patch_vrms(const cpcal_spectrum* spec, double* out) {
  return guarded([&] {
    check_out(out);
    check_ptr(spec, "spectrum");
    *out = patches::v_rms(spec->spec);
  });
}

cpcal_status cpcal_patch_energy_pp(const cpcal_spectrum* spec, double d, double* out) {
  return guarded([&] {
    check_out(out);
    check_ptr(spec, "spectrum");
    *out = patches::patch_energy_pp(spec->spec, d);
  });
}

cpcal_status cpcal_patch_force_cp(const cpcal_spectrum* spec, const cpcal_geometry* geom,
                                  double d, double* out) {
  return guarded([&] {
    check_out(out);
    check_ptr(spec, "spectrum");
    *out = patches::patch_force_cp(spec->spec, to_geometry(geom), d);
  });
}

cpcal_status cpcal_patch_force_cp_large_limit(const cpcal_spectrum* spec,
                                              const cpcal_geometry* geom, double d,
                                              double* out) {
  return guarded([&] {
    check_out(out);
    check_ptr(spec, "spectrum");
    *out = patches::patch_force_cp_large_limit(to_geometry(geom), d,
                                               patches::v_rms(spec->spec));
  });
}

cpcal_status cpcal_dataset_load(const char* path, cpcal_dataset** out) {
  return guarded([&] {
    check_out(out);
    check_ptr(path, "path");
    *out = new cpcal_dataset{read_calibration_csv(path)};
  });
}

void cpcal_dataset_free(cpcal_dataset* data) { delete data; }

size_t cpcal_dataset_size(const cpcal_dataset* data) {
  return data == nullptr ? 0 : data->points.size();
}

cpcal_status cpcal_dataset_point(const cpcal_dataset* data, size_t i, double* v_pzt,
                                 double* v_bias, double* nu, double* sigma_nu) {
  return guarded([&] {
    check_ptr(data, "dataset");
    require(i < data->points.size(), ErrorClass::invalid_argument,
            "point index " + std::to_string(i) + " out of range (size " +
                std::to_string(data->points.size()) + ")");
    const CalibrationPoint& p = data->points[i];
    if (v_pzt != nullptr) *v_pzt = p.v_pzt;
    if (v_bias != nullptr) *v_bias = p.v_bias;
    if (nu != nullptr) *nu = p.nu;
    if (sigma_nu != nullptr) *sigma_nu = p.sigma_nu;
  });
}

cpcal_status cpcal_run(const char* command, const char* config_path, const char* dataset_path,
                       const char* out_dir, const char* overrides, char** summary_out) {
  return guarded([&] {
    check_out(summary_out);
    check_ptr(command, "command");
    check_ptr(config_path, "config_path");
    const std::string cmd = command;
    const std::string out = out_dir != nullptr ? out_dir : ".";
    config::Config cfg = config::Config::load(config_path);
    if (overrides != nullptr) cfg.apply_overrides(overrides);

    std::string summary;
    if (cmd == "generate") {
      summary = runner::run_generate(cfg, out);
    } else if (cmd == "fit" || cmd == "scan" || cmd == "residuals") {
      check_ptr(dataset_path, "dataset_path");
      if (cmd == "fit") summary = runner::run_fit(cfg, dataset_path, out);
      if (cmd == "scan") summary = runner::run_scan(cfg, dataset_path, out);
      if (cmd == "residuals") summary = runner::run_residuals(cfg, dataset_path, out);
    } else if (cmd == "deformation") {
      summary = runner::run_deformation(cfg, out);
    } else if (cmd == "patches") {
      summary = runner::run_patches(cfg, out);
    } else {
      throw Error(ErrorClass::invalid_argument,
                  "unknown command '" + cmd +
                      "' (expected generate, fit, scan, residuals, deformation, patches)");
    }
    *summary_out = dup_string(summary);
  });
}

cpcal_status cpcal_veq_table(double d, char** text_out) {
  return guarded([&] {
    check_out(text_out);
    *text_out = dup_string(runner::veq_table_text(d));
  });
}

}  // extern "C"
