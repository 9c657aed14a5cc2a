#include "report.hpp"

#include <charconv>
#include <fstream>

#include "error.hpp"
#include "version.hpp"

namespace cpcal::report {

std::vector<std::string> standard_comments(const std::string& config_hash,
                                           std::optional<std::uint64_t> seed) {
  std::vector<std::string> out;
  out.push_back(std::string("cpcal ") + kVersion);
  out.push_back("config " + config_hash);
  if (seed) out.push_back("seed " + std::to_string(*seed));
  return out;
}

std::string format_num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_table(std::ostream& out, const Table& table) {
  for (const auto& c : table.comments) out << "# " << c << "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? ", " : "") << table.columns[i];
  }
  out << "\n";
  for (const auto& row : table.rows) {
    require(row.size() == table.columns.size(), ErrorClass::invalid_argument,
            "table row width does not match its header");
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? ", " : "") << row[i];
    out << "\n";
  }
}

void write_table(const std::string& path, const Table& table) {
  std::ofstream out(path);
  require(out.good(), ErrorClass::io, "cannot open output file '" + path + "'");
  write_table(out, table);
  out.flush();
  require(out.good(), ErrorClass::io, "failed writing output file '" + path + "'");
}

void write_json(const std::string& path, const nlohmann::ordered_json& doc) {
  std::ofstream out(path);
  require(out.good(), ErrorClass::io, "cannot open output file '" + path + "'");
  out << doc.dump(2) << "\n";
  out.flush();
  require(out.good(), ErrorClass::io, "failed writing output file '" + path + "'");
}

nlohmann::ordered_json fit_to_json(const fitting::FitResult& fit) {
  nlohmann::ordered_json j;
  j["params"] = nlohmann::ordered_json::object();
  j["sigmas"] = nlohmann::ordered_json::object();
  for (const auto& [name, value] : fit.params) j["params"][name] = value;
  for (const auto& [name, value] : fit.sigmas) j["sigmas"][name] = value;
  j["chi2"] = fit.chi2;
  j["dof"] = fit.dof;
  j["reduced_chi2"] = fit.reduced_chi2;
  j["unit_weights"] = fit.unit_weights;
  j["plateau"] = fit.plateau;
  return j;
}

}  // namespace cpcal::report
