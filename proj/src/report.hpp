#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fitting.hpp"

// Plot-ready flat tables and JSON fit reports. Every file starts with
// comment lines carrying the tool version and the config fingerprint, so
// any output can be traced back to the exact settings that produced it.
namespace cpcal::report {

// "# cpcal <version>", "# config <hash>"[, "# seed <n>"]
std::vector<std::string> standard_comments(const std::string& config_hash,
                                           std::optional<std::uint64_t> seed = std::nullopt);

struct Table {
  std::vector<std::string> comments;  // written as "# ..." lines
  std::vector<std::string> columns;   // names carry explicit unit suffixes
  std::vector<std::vector<std::string>> rows;
};

// Shortest exact decimal form (round-trips through double).
std::string format_num(double v);

void write_table(std::ostream& out, const Table& table);
// Overwrites; parent directory must exist.
void write_table(const std::string& path, const Table& table);

void write_json(const std::string& path, const nlohmann::ordered_json& doc);

nlohmann::ordered_json fit_to_json(const fitting::FitResult& fit);

}  // namespace cpcal::report
