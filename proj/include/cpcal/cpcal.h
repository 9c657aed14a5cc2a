/* C API for the cylinder-plane electrostatic-calibration toolkit.
 *
 * All functions return cpcal_status; CPCAL_OK (0) means success. On any
 * failure the out-parameters are untouched and cpcal_last_error() returns a
 * human-readable message for the calling thread. Strings returned through
 * char** out-parameters are heap-allocated; release them with
 * cpcal_string_free(). Opaque handles are released with their *_free()
 * function; every *_free tolerates NULL.
 *
 * Conventions: SI base units throughout (m, kg, Hz, V, N); forces are
 * attraction magnitudes (>= 0); squared-frequency shifts are <= 0.
 */
#ifndef CPCAL_H
#define CPCAL_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cpcal_status {
  CPCAL_OK = 0,
  CPCAL_EINVAL = 1,       /* invalid argument / malformed input */
  CPCAL_EDOMAIN = 2,      /* parameter outside the model's domain */
  CPCAL_ECONFIG = 3,      /* config-file validation failure */
  CPCAL_EIO = 4,          /* file open/read/write failure */
  CPCAL_ECONVERGENCE = 5, /* an iterative fit failed to converge */
  CPCAL_ECONTACT = 6,     /* piezo voltage at or past mechanical contact */
  CPCAL_EQUADRATURE = 7,  /* integral failed its error target */
  CPCAL_EINTERNAL = 8     /* unexpected failure */
} cpcal_status;

enum {
  CPCAL_GEOM_SPHERE_PLANE = 0,
  CPCAL_GEOM_CYLINDER_PLANE = 1,
  CPCAL_GEOM_PARALLEL_PLANES = 2
};

enum { CPCAL_SHAPE_FLAT_FACET = 0, CPCAL_SHAPE_TRIANGULAR_TIP = 1 };

/* Only the fields of the active kind are read: sphere uses R, cylinder uses
 * a/L/L_eff, parallel planes use S. */
typedef struct cpcal_geometry {
  int kind;     /* CPCAL_GEOM_* */
  double a;     /* cylinder radius [m] */
  double L;     /* cylinder length [m] */
  double L_eff; /* effective interaction length [m] */
  double R;     /* sphere radius [m] */
  double S;     /* plate area [m^2] */
} cpcal_geometry;

typedef struct cpcal_resonator {
  double m_eff; /* effective mass [kg] */
  double nu0;   /* unperturbed frequency [Hz] */
} cpcal_resonator;

typedef struct cpcal_spectrum cpcal_spectrum; /* patch-potential spectrum */
typedef struct cpcal_dataset cpcal_dataset;   /* calibration dataset */

/* ---- library ---- */

const char* cpcal_version(void);
/* Message of the most recent failing call on this thread ("" if none). */
const char* cpcal_last_error(void);
const char* cpcal_status_name(cpcal_status status);
void cpcal_string_free(char* s);

/* ---- analytic models ---- */

/* Exact cylinder-plane Coulomb force at gap d [m], bias V [V]. */
cpcal_status cpcal_coulomb_force_cylinder_exact(const cpcal_geometry* geom, double d, double V,
                                                double* out);
/* Proximity-force approximation of the same. */
cpcal_status cpcal_coulomb_force_cylinder_pfa(const cpcal_geometry* geom, double d, double V,
                                              double* out);
/* Ideal zero-temperature Casimir force for the given geometry. */
cpcal_status cpcal_casimir_force_ideal(const cpcal_geometry* geom, double d, double* out);
/* PFA Coulomb force for the given geometry. */
cpcal_status cpcal_coulomb_force_pfa(const cpcal_geometry* geom, double d, double V, double* out);
/* Bias at which the PFA Coulomb force equals the ideal Casimir force. */
cpcal_status cpcal_equivalent_casimir_voltage(int geometry_kind, double d, double* out);
/* Squared-frequency shift -K_el (V - V0)^2 with optional tilt alpha. */
cpcal_status cpcal_electrostatic_freq_shift(const cpcal_geometry* geom,
                                            const cpcal_resonator* res, double d, double V,
                                            double V0, double alpha, double* out);
/* Curvature coefficient K_el(d) [Hz^2 V^-2]. */
cpcal_status cpcal_curvature_coefficient(const cpcal_geometry* geom, const cpcal_resonator* res,
                                         double d, double* out);
/* Effective power-law exponent B of the deformed-cylinder shift over
 * n_points log-spaced gaps in [d_lo, d_hi]. b_prime is read for the
 * triangular tip only. */
cpcal_status cpcal_deformation_exponent(int shape_kind, double b, double b_prime,
                                        const cpcal_geometry* geom, const cpcal_resonator* res,
                                        double d_lo, double d_hi, int n_points, double* out);

/* ---- patch-potential spectra ---- */

cpcal_status cpcal_spectrum_flat_band(double k_min, double k_max, double amplitude,
                                      cpcal_spectrum** out);
cpcal_status cpcal_spectrum_gaussian_band(double k_min, double k_max, double amplitude,
                                          cpcal_spectrum** out);
/* Two-column text file: k [1/m], S(k) [V^2 m^2]. */
cpcal_status cpcal_spectrum_load(const char* path, cpcal_spectrum** out);
void cpcal_spectrum_free(cpcal_spectrum* spec);

cpcal_status cpcal_patch_vrms(const cpcal_spectrum* spec, double* out);
/* Parallel-plane patch interaction energy per area [J/m^2] at gap d. */
cpcal_status cpcal_patch_energy_pp(const cpcal_spectrum* spec, double d, double* out);
/* Cylinder-plane patch force [N] at gap d. */
cpcal_status cpcal_patch_force_cp(const cpcal_spectrum* spec, const cpcal_geometry* geom,
                                  double d, double* out);
/* Large-patch (small k d) closed-form limit at the spectrum's v_rms. */
cpcal_status cpcal_patch_force_cp_large_limit(const cpcal_spectrum* spec,
                                              const cpcal_geometry* geom, double d, double* out);

/* ---- datasets ---- */

cpcal_status cpcal_dataset_load(const char* path, cpcal_dataset** out);
void cpcal_dataset_free(cpcal_dataset* data);
size_t cpcal_dataset_size(const cpcal_dataset* data);
/* Copies point i into the out-parameters (any may be NULL). */
cpcal_status cpcal_dataset_point(const cpcal_dataset* data, size_t i, double* v_pzt,
                                 double* v_bias, double* nu, double* sigma_nu);

/* ---- config-driven commands (the CLI's engine) ----
 *
 * command: one of "generate", "fit", "scan", "residuals", "deformation",
 * "patches". dataset_path is required by fit/scan/residuals and ignored
 * otherwise (pass NULL). overrides is an optional ';'-separated list of
 * "section.key=value" items applied on top of the config file (NULL for
 * none). Output files are written under out_dir; *summary_out receives a
 * JSON description of the run. */
cpcal_status cpcal_run(const char* command, const char* config_path, const char* dataset_path,
                       const char* out_dir, const char* overrides, char** summary_out);

/* Equivalent-voltage table at gap d for all three geometries. */
cpcal_status cpcal_veq_table(double d, char** text_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CPCAL_H */
