#include "h2ad/config_file.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "h2ad/types.hpp"

namespace h2ad {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text, const std::string& origin) {
  ConfigFile cfg;
  cfg.origin_ = origin;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    // ';' only opens a comment at line start: list values use it as a separator.
    const auto cut = line.find('#');
    if (cut != std::string::npos) line.erase(cut);
    line = trim(line);
    if (line.empty() || line.front() == ';') continue;
    const auto at = origin + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(at + ": unterminated section header");
      section = lower(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) throw ConfigError(at + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(at + ": expected key = value");
    const auto key = lower(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError(at + ": empty key");
    auto& sec = cfg.values_[section];
    if (sec.count(key)) throw ConfigError(at + ": duplicate key '" + key + "'");
    sec[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse(ss.str(), path.string());
}

std::string ConfigFile::where(const std::string& section, const std::string& key) const {
  return origin_ + ": " + (section.empty() ? key : section + "." + key);
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return raw(section, key).has_value();
}

std::optional<std::string> ConfigFile::raw(const std::string& section, const std::string& key) const {
  const auto s = values_.find(section);
  if (s == values_.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  touched_[section + "." + key] = true;
  return k->second;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
  return raw(section, key).value_or(fallback);
}

double ConfigFile::get_double(const std::string& section, const std::string& key, double fallback) const {
  const auto v = raw(section, key);
  if (!v) return fallback;
  try {
    size_t used = 0;
    const double d = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(where(section, key) + ": expected a number, got '" + *v + "'");
  }
}

long ConfigFile::get_int(const std::string& section, const std::string& key, long fallback) const {
  const auto v = raw(section, key);
  if (!v) return fallback;
  long out = 0;
  const auto* end = v->data() + v->size();
  const auto res = std::from_chars(v->data(), end, out);
  if (res.ec != std::errc() || res.ptr != end)
    throw ConfigError(where(section, key) + ": expected an integer, got '" + *v + "'");
  return out;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const auto v = raw(section, key);
  if (!v) return fallback;
  const auto s = lower(*v);
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw ConfigError(where(section, key) + ": expected a boolean, got '" + *v + "'");
}

std::vector<double> ConfigFile::get_doubles(const std::string& section, const std::string& key,
                                            const std::vector<double>& fallback) const {
  const auto v = raw(section, key);
  if (!v) return fallback;
  std::vector<double> out;
  std::istringstream is(*v);
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ConfigError(where(section, key) + ": bad list entry '" + item + "'");
    }
  }
  return out;
}

std::vector<int> ConfigFile::get_ints(const std::string& section, const std::string& key,
                                      const std::vector<int>& fallback) const {
  const auto v = raw(section, key);
  if (!v) return fallback;
  std::vector<int> out;
  for (double d : get_doubles(section, key, {})) {
    if (d != static_cast<double>(static_cast<int>(d)))
      throw ConfigError(where(section, key) + ": list entries must be integers");
    out.push_back(static_cast<int>(d));
  }
  return out;
}

std::vector<std::string> ConfigFile::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [section, keys] : values_)
    for (const auto& [key, value] : keys) {
      const auto name = section + "." + key;
      if (!touched_.count(name)) out.push_back(section.empty() ? key : name);
    }
  return out;
}

}  // namespace h2ad
