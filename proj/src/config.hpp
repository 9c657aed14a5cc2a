#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

// Strict scenario-configuration files: `[section]` headers (dotted names
// allowed), `key = value` lines, `#` comments. Every key is validated
// against the full schema at parse time, so typos fail loudly with a
// file:line path instead of silently falling back to a default.
namespace cpcal::config {

// N geometrically spaced values, parsed from "LO:HI:N".
struct RangeSpec {
  double lo = 0;
  double hi = 0;
  std::size_t n = 0;
};

// Exponent grid, parsed from "MIN:MAX:STEP".
struct GridSpec {
  double min = 0;
  double max = 0;
  double step = 0;
};

// Closed interval, parsed from "LO:HI".
struct WindowSpec {
  double lo = 0;
  double hi = 0;
};

class Config {
 public:
  static Config load(const std::string& path);
  static Config parse(const std::string& text, const std::string& origin);

  // "section.key=value" items separated by ';' or newlines, validated
  // against the same schema. Overrides participate in hash(), so runs with
  // different effective settings never share a fingerprint.
  void apply_overrides(const std::string& overrides);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& key) const;  // whitespace-separated
  RangeSpec get_range(const std::string& key) const;
  GridSpec get_grid(const std::string& key) const;
  WindowSpec get_window(const std::string& key) const;

  // FNV-1a over the raw text plus applied overrides, as 16 hex digits.
  // Embedded in every output so results can be traced to their settings.
  std::string hash() const;
  const std::string& origin() const { return origin_; }

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  const Entry& at(const std::string& key) const;
  std::string where(const std::string& key) const;

  std::map<std::string, Entry> entries_;
  std::string origin_;
  std::string hashed_text_;
};

}  // namespace cpcal::config
