#include "adn/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "adn/error.hpp"

namespace adn {

namespace {

double parse_number(const std::string& text, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
  if (used == 0 || used != text.size()) {
    throw Error(ErrorCode::ParseError, where + ": '" + text + "' is not a number");
  }
  return v;
}

}  // namespace

Config Config::parse(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  Config c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw Error(ErrorCode::ParseError, "key '" + section + "' outside any section");
    }
    auto& dst = c.values_[section];
    for (const auto& [key, value] : body) dst[key] = value.data();
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return parse(f);
}

bool Config::has(const std::string& section, const std::string& key) const {
  return get(section, key).has_value();
}

std::vector<std::string> Config::sections() const {
  std::vector<std::string> out;
  for (const auto& [name, body] : values_) out.push_back(name);
  return out;
}

std::vector<std::string> Config::sections_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [name, body] : values_) {
    if (name.size() > prefix.size() && name.compare(0, prefix.size(), prefix) == 0) {
      out.push_back(name.substr(prefix.size()));
    }
  }
  return out;
}

std::optional<std::string> Config::get(const std::string& section, const std::string& key) const {
  auto s = values_.find(section);
  if (s == values_.end()) return std::nullopt;
  auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  return get(section, key).value_or(fallback);
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) const {
  const auto v = get(section, key);
  return v ? parse_number(*v, section + "." + key) : fallback;
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
  const double v = get_double(section, key, fallback);
  if (v != static_cast<int>(v)) {
    throw Error(ErrorCode::ParseError, section + "." + key + " must be an integer");
  }
  return static_cast<int>(v);
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  auto v = get(section, key);
  if (!v) return fallback;
  std::string s = *v;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (s == "1" || s == "true" || s == "on" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "off" || s == "no") return false;
  throw Error(ErrorCode::ParseError, section + "." + key + ": '" + *v + "' is not a boolean");
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key,
                                     const std::vector<double>& fallback) const {
  auto v = get(section, key);
  if (!v) return fallback;
  std::string text = *v;
  std::replace(text.begin(), text.end(), ',', ' ');
  std::istringstream ss(text);
  std::vector<double> out;
  std::string tok;
  while (ss >> tok) out.push_back(parse_number(tok, section + "." + key));
  return out;
}

}  // namespace adn
