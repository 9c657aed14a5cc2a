#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

// Record types shared between the data generator and the analysis engine,
// plus the delimiter-separated text format both sides speak.
namespace cpcal {

// One frequency measurement at a piezo setting and bias voltage.
struct CalibrationPoint {
  std::int64_t run_id = 0;
  std::int64_t timestamp = 0;  // ordinal within the run
  double v_pzt = 0;            // piezo voltage [V]
  double v_bias = 0;           // applied bias [V]
  double nu = 0;               // resonance frequency [Hz]
  double sigma_nu = 0;         // per-point frequency uncertainty [Hz]
};

// One per-distance parabola-fit output: curvature of nu^2 vs bias.
struct CurvatureSample {
  double v_pzt = 0;      // piezo voltage [V]
  double k_el = 0;       // curvature [Hz^2/V^2]
  double sigma_k = 0;    // curvature uncertainty [Hz^2/V^2]
  double v0 = 0;         // minimizing potential [V]
  double sigma_v0 = 0;   // its uncertainty [V]
  double nu0_sq = 0;     // parabola apex [Hz^2]
};

// Header row written and required on read (after optional '#' comments):
//   run_id, timestamp, V_PZT, V_bias, nu, sigma_nu
// Values are comma-separated, printed with 17 significant digits so a
// write/read round trip is bit-exact.
extern const char* const kCalibrationCsvHeader;

void write_calibration_csv(std::ostream& out, const std::vector<CalibrationPoint>& points,
                           const std::vector<std::string>& header_comments = {});
void write_calibration_csv(const std::string& path, const std::vector<CalibrationPoint>& points,
                           const std::vector<std::string>& header_comments = {});

std::vector<CalibrationPoint> read_calibration_csv(std::istream& in, const std::string& origin);
std::vector<CalibrationPoint> read_calibration_csv(const std::string& path);

}  // namespace cpcal
