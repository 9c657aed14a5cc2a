#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "error.hpp"

namespace cpcal::config {

namespace {

// Complete key schema. One shared vocabulary for every command keeps a
// single scenario file usable across generate/fit/scan/residuals.
const std::set<std::string>& schema() {
  static const std::set<std::string> keys = {
      "geometry.kind", "geometry.a", "geometry.L", "geometry.L_eff", "geometry.R", "geometry.S",
      "resonator.m_eff", "resonator.nu0",
      "piezo.beta", "piezo.v0_pzt",
      "scenario.force", "scenario.alpha1", "scenario.alpha2", "scenario.p",
      "scenario.v0_profile", "scenario.v0", "scenario.v0_far", "scenario.v0_slope",
      "scenario.v0_near", "scenario.d_knee",
      "scenario.sigma_nu", "scenario.sigma_nu_rel", "scenario.v0_sigma",
      "scenario.kel_drift_frac", "scenario.nu0_ramp", "scenario.seed",
      "grid.gaps", "grid.v_pzt", "grid.v_bias", "grid.v_bias_range", "grid.run_id",
      "analysis.mode", "analysis.q_fixed", "analysis.q_grid", "analysis.offset",
      "analysis.fit_window", "analysis.eval_window",
      "deformation.shape", "deformation.b", "deformation.b_prime", "deformation.fit_range",
      "patches.spectrum", "patches.k_min", "patches.k_max", "patches.amplitude", "patches.file",
      "patches.d_range",
      "output.name",
  };
  return keys;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    require(pos == s.size(), ErrorClass::config, where + ": invalid number '" + s + "'");
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error(ErrorClass::config, where + ": invalid number '" + s + "'");
  }
}

std::uint64_t parse_uint(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    require(pos == s.size() && s.find('-') == std::string::npos, ErrorClass::config,
            where + ": invalid non-negative integer '" + s + "'");
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error(ErrorClass::config, where + ": invalid non-negative integer '" + s + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::islower(static_cast<unsigned char>(c)) ||
           std::isdigit(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
           std::isupper(static_cast<unsigned char>(c));
  });
}

}  // namespace

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorClass::io, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

Config Config::parse(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  cfg.hashed_text_ = text;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    const std::size_t hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      require(line.back() == ']', ErrorClass::config, where + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      require(valid_name(section), ErrorClass::config,
              where + ": invalid section name '" + section + "'");
      continue;
    }
    const std::size_t eq = line.find('=');
    require(eq != std::string::npos, ErrorClass::config,
            where + ": expected 'key = value' or '[section]'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    require(!section.empty(), ErrorClass::config,
            where + ": key '" + key + "' appears before any [section]");
    require(valid_name(key), ErrorClass::config, where + ": invalid key name '" + key + "'");
    require(!value.empty(), ErrorClass::config, where + ": empty value for key '" + key + "'");
    const std::string full = section + "." + key;
    require(schema().count(full) != 0, ErrorClass::config,
            where + ": unknown key '" + full + "'");
    const auto dup = cfg.entries_.find(full);
    if (dup != cfg.entries_.end()) {
      throw Error(ErrorClass::config, where + ": duplicate key '" + full + "' (first at line " +
                                          std::to_string(dup->second.line) + ")");
    }
    cfg.entries_[full] = Entry{value, lineno};
  }
  return cfg;
}

void Config::apply_overrides(const std::string& overrides) {
  std::string normalized = overrides;
  std::replace(normalized.begin(), normalized.end(), '\n', ';');
  for (const std::string& raw : split(normalized, ';')) {
    const std::string item = trim(raw);
    if (item.empty()) continue;
    const std::size_t eq = item.find('=');
    require(eq != std::string::npos, ErrorClass::config,
            "override '" + item + "': expected 'section.key=value'");
    const std::string key = trim(item.substr(0, eq));
    const std::string value = trim(item.substr(eq + 1));
    require(schema().count(key) != 0, ErrorClass::config,
            "override '" + item + "': unknown key '" + key + "'");
    require(!value.empty(), ErrorClass::config, "override '" + item + "': empty value");
    entries_[key] = Entry{value, 0};
    hashed_text_ += "\noverride:" + key + "=" + value;
  }
}

bool Config::has(const std::string& key) const { return entries_.count(key) != 0; }

const Config::Entry& Config::at(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    throw Error(ErrorClass::config, origin_ + ": missing required key '" + key + "'");
  }
  return it->second;
}

std::string Config::where(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end() || it->second.line == 0) return origin_ + ": key '" + key + "'";
  return origin_ + ":" + std::to_string(it->second.line) + ": key '" + key + "'";
}

std::string Config::get_string(const std::string& key) const { return at(key).value; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? at(key).value : fallback;
}

double Config::get_double(const std::string& key) const {
  return parse_double(at(key).value, where(key));
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? parse_uint(at(key).value, where(key)) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = at(key).value;
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw Error(ErrorClass::config,
              where(key) + ": expected on/off/true/false/1/0, got '" + v + "'");
}

std::vector<double> Config::get_list(const std::string& key) const {
  std::istringstream in(at(key).value);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double(tok, where(key)));
  require(!out.empty(), ErrorClass::config, where(key) + ": empty list");
  return out;
}

RangeSpec Config::get_range(const std::string& key) const {
  const auto parts = split(at(key).value, ':');
  require(parts.size() == 3, ErrorClass::config, where(key) + ": expected LO:HI:N");
  RangeSpec r;
  r.lo = parse_double(trim(parts[0]), where(key));
  r.hi = parse_double(trim(parts[1]), where(key));
  r.n = parse_uint(trim(parts[2]), where(key));
  require(r.n >= 2, ErrorClass::config, where(key) + ": need at least 2 points");
  return r;
}

GridSpec Config::get_grid(const std::string& key) const {
  const auto parts = split(at(key).value, ':');
  require(parts.size() == 3, ErrorClass::config, where(key) + ": expected MIN:MAX:STEP");
  GridSpec g;
  g.min = parse_double(trim(parts[0]), where(key));
  g.max = parse_double(trim(parts[1]), where(key));
  g.step = parse_double(trim(parts[2]), where(key));
  return g;
}

WindowSpec Config::get_window(const std::string& key) const {
  const auto parts = split(at(key).value, ':');
  require(parts.size() == 2, ErrorClass::config, where(key) + ": expected LO:HI");
  WindowSpec w;
  w.lo = parse_double(trim(parts[0]), where(key));
  w.hi = parse_double(trim(parts[1]), where(key));
  require(w.lo < w.hi, ErrorClass::config, where(key) + ": window LO must be < HI");
  return w;
}

std::string Config::hash() const {
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : hashed_text_) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

}  // namespace cpcal::config
