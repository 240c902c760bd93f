/**
 * @file config_file.hpp
 * @brief Flat key = value experiment configuration files.
 *
 * Format: one "dotted.key = value" per line, '#' starts a comment, blank
 * lines ignored. Values are strings; typed accessors parse on demand.
 */
#ifndef SBEAM_CONFIG_FILE_HPP
#define SBEAM_CONFIG_FILE_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace sbeam {

class FlatConfig {
 public:
  static FlatConfig parse(const std::string& text);
  static FlatConfig parse_file(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated values; each entry may be a decimal or a "p/q" fraction.
  std::vector<double> get_fraction_list(const std::string& key,
                                        const std::string& fallback) const;
  std::vector<std::uint64_t> get_u64_list(const std::string& key,
                                          const std::string& fallback) const;

  /// Rejects keys outside the known set (typo guard, fail-fast).
  void require_known_keys(const std::set<std::string>& known) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  /// Canonical "key = value" rendering used for digests.
  std::string canonical_text() const;

 private:
  std::map<std::string, std::string> values_;
};

/// "p/q" or decimal string to double.
double parse_fraction(const std::string& text);

/// Short name for a compression level: 1/32 -> "k1_32", 0.3 -> "k0.3".
std::string k_level_name(double k);

}  // namespace sbeam

#endif  // SBEAM_CONFIG_FILE_HPP
