#include "sbeam/config_file.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sbeam/errors.hpp"

namespace sbeam {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

FlatConfig FlatConfig::parse(const std::string& text) {
  FlatConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("config line " + std::to_string(line_no) +
                         ": expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw InvalidInput("config line " + std::to_string(line_no) +
                         ": empty key");
    if (cfg.values_.count(key))
      throw InvalidInput("duplicate config key: " + key);
    cfg.values_[key] = value;
  }
  return cfg;
}

FlatConfig FlatConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string FlatConfig::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end())
    throw InvalidInput("missing required config key: " + key);
  return it->second;
}

std::string FlatConfig::get_string(const std::string& key,
                                   const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::uint64_t FlatConfig::get_u64(const std::string& key,
                                  std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  return get_u64(key);
}

std::uint64_t FlatConfig::get_u64(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t used = 0;
    const std::uint64_t out = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw InvalidInput("config key " + key + ": expected an integer, got '" +
                       v + "'");
  }
}

double FlatConfig::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_string(key);
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw InvalidInput("config key " + key + ": expected a number, got '" +
                       v + "'");
  }
}

bool FlatConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_string(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InvalidInput("config key " + key + ": expected a boolean, got '" + v +
                     "'");
}

std::vector<double> FlatConfig::get_fraction_list(
    const std::string& key, const std::string& fallback) const {
  const std::string v = get_string(key, fallback);
  std::vector<double> out;
  std::istringstream ls(v);
  std::string item;
  while (std::getline(ls, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) continue;
    out.push_back(parse_fraction(t));
  }
  if (out.empty()) throw InvalidInput("config key " + key + ": empty list");
  return out;
}

std::vector<std::uint64_t> FlatConfig::get_u64_list(
    const std::string& key, const std::string& fallback) const {
  const std::string v = get_string(key, fallback);
  std::vector<std::uint64_t> out;
  std::istringstream ls(v);
  std::string item;
  while (std::getline(ls, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) continue;
    try {
      out.push_back(std::stoull(t));
    } catch (const std::exception&) {
      throw InvalidInput("config key " + key + ": bad integer '" + t + "'");
    }
  }
  if (out.empty()) throw InvalidInput("config key " + key + ": empty list");
  return out;
}

void FlatConfig::require_known_keys(const std::set<std::string>& known) const {
  for (const auto& [key, value] : values_) {
    (void)value;
    if (!known.count(key))
      throw InvalidInput("unknown config key: " + key);
  }
}

std::string FlatConfig::canonical_text() const {
  std::ostringstream os;
  for (const auto& [key, value] : values_) os << key << " = " << value << '\n';
  return os.str();
}

double parse_fraction(const std::string& text) {
  const std::size_t slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      const double num = std::stod(text.substr(0, slash));
      const double den = std::stod(text.substr(slash + 1));
      if (den == 0.0) throw InvalidInput("fraction with zero denominator");
      return num / den;
    }
    return std::stod(text);
  } catch (const InvalidInput&) {
    throw;
  } catch (const std::exception&) {
    throw InvalidInput("bad fraction: '" + text + "'");
  }
}

std::string k_level_name(double k) {
  for (std::uint64_t den = 1; den <= 1024; ++den) {
    const double num = k * den;
    const double rounded = std::round(num);
    if (rounded >= 1.0 && std::abs(num - rounded) < 1e-9) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "k%llu_%llu",
                    static_cast<unsigned long long>(rounded),
                    static_cast<unsigned long long>(den));
      return buf;
    }
  }
  char buf[48];
  std::snprintf(buf, sizeof(buf), "k%g", k);
  return buf;
}

}  // namespace sbeam
