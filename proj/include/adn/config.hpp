#pragma once

// Sectioned key = value documents ('#' or ';' comments). Section names may
// contain dots ("microgrid.18"); they are matched literally.

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace adn {

class Config {
 public:
  static Config parse(std::istream& in);
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& section, const std::string& key) const;
  std::vector<std::string> sections() const;
  /// Sections whose name starts with `prefix`, prefix stripped.
  std::vector<std::string> sections_with_prefix(const std::string& prefix) const;

  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
  /// Throws ParseError when present but not numeric.
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& section, const std::string& key,
                               const std::vector<double>& fallback) const;

 private:
  std::map<std::string, std::map<std::string, std::string>> values_;
};

}  // namespace adn
