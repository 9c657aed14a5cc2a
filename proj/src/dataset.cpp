#include "dataset.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "error.hpp"

namespace cpcal {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, ',')) fields.push_back(trim(cur));
  return fields;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    require(pos == s.size(), ErrorClass::io, where + ": trailing characters in '" + s + "'");
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error(ErrorClass::io, where + ": not a number: '" + s + "'");
  }
}

std::int64_t parse_int(const std::string& s, const std::string& where) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && ptr == s.data() + s.size(), ErrorClass::io,
          where + ": not an integer: '" + s + "'");
  return v;
}

}  // namespace

const char* const kCalibrationCsvHeader = "run_id, timestamp, V_PZT, V_bias, nu, sigma_nu";

void write_calibration_csv(std::ostream& out, const std::vector<CalibrationPoint>& points,
                           const std::vector<std::string>& header_comments) {
  for (const auto& line : header_comments) out << "# " << line << "\n";
  out << kCalibrationCsvHeader << "\n";
  out << std::setprecision(17);
  for (const auto& p : points) {
    out << p.run_id << ", " << p.timestamp << ", " << p.v_pzt << ", " << p.v_bias << ", " << p.nu
        << ", " << p.sigma_nu << "\n";
  }
}

void write_calibration_csv(const std::string& path, const std::vector<CalibrationPoint>& points,
                           const std::vector<std::string>& header_comments) {
  std::ofstream out(path);
  require(out.good(), ErrorClass::io, "cannot open for writing: " + path);
  write_calibration_csv(out, points, header_comments);
  out.flush();
  require(out.good(), ErrorClass::io, "write failed: " + path);
}

std::vector<CalibrationPoint> read_calibration_csv(std::istream& in, const std::string& origin) {
  std::vector<CalibrationPoint> points;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = origin + ":" + std::to_string(line_no);
    const std::string body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    if (!header_seen) {
      require(split_fields(body) == split_fields(kCalibrationCsvHeader), ErrorClass::io,
              where + ": expected header '" + std::string(kCalibrationCsvHeader) + "'");
      header_seen = true;
      continue;
    }
    const auto fields = split_fields(body);
    require(fields.size() == 6, ErrorClass::io,
            where + ": expected 6 comma-separated fields, got " + std::to_string(fields.size()));
    CalibrationPoint p;
    p.run_id = parse_int(fields[0], where);
    p.timestamp = parse_int(fields[1], where);
    p.v_pzt = parse_double(fields[2], where);
    p.v_bias = parse_double(fields[3], where);
    p.nu = parse_double(fields[4], where);
    p.sigma_nu = parse_double(fields[5], where);
    points.push_back(p);
  }
  require(header_seen, ErrorClass::io, origin + ": missing header row");
  return points;
}

std::vector<CalibrationPoint> read_calibration_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorClass::io, "cannot open dataset: " + path);
  return read_calibration_csv(in, path);
}

}  // namespace cpcal
