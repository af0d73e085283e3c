#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace h2ad {

/// Plain-text configuration: "[section]" headers and "key = value" lines.
/// '#' starts a comment anywhere; ';' only at line start (it separates list groups). Keys outside any section live in section "".
class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text, const std::string& origin = "<string>");
  static ConfigFile load(const std::filesystem::path& path);

  bool has(const std::string& section, const std::string& key) const;
  std::optional<std::string> raw(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  long get_int(const std::string& section, const std::string& key, long fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  /// Comma-separated list of numbers.
  std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                  const std::vector<double>& fallback) const;
  std::vector<int> get_ints(const std::string& section, const std::string& key, const std::vector<int>& fallback) const;

  /// "section.key" entries that were never read; useful to report typos.
  std::vector<std::string> unused_keys() const;

 private:
  std::string where(const std::string& section, const std::string& key) const;

  std::string origin_;
  std::map<std::string, std::map<std::string, std::string>> values_;
  mutable std::map<std::string, bool> touched_;
};

}  // namespace h2ad
