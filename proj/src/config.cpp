#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "hhfreak/detector.hpp"
#include "hhfreak/errors.hpp"

namespace hhfreak {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_number(const std::string& value, const std::string& key, int lineno) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ParseError("config line " + std::to_string(lineno) + ": bad number for " + key);
  return v;
}

std::vector<double> parse_sigma_list(const std::string& value, int lineno) {
  std::vector<double> sigmas;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty())
      throw ParseError("config line " + std::to_string(lineno) + ": empty sigma entry");
    sigmas.push_back(parse_number(item, "base_sigmas", lineno));
  }
  if (sigmas.empty())
    throw ParseError("config line " + std::to_string(lineno) + ": empty sigma list");
  return sigmas;
}

} // namespace

DetectorConfig parse_detector_config(std::istream& source) {
  DetectorConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(source, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "corner_threshold") {
      cfg.corner_threshold = parse_number(value, key, lineno);
    } else if (key == "hessian_threshold") {
      cfg.hessian_threshold = parse_number(value, key, lineno);
    } else if (key == "harris_k") {
      cfg.harris_k = parse_number(value, key, lineno);
    } else if (key == "tile_w") {
      cfg.tiles.tile_w = static_cast<int>(parse_number(value, key, lineno));
    } else if (key == "tile_h") {
      cfg.tiles.tile_h = static_cast<int>(parse_number(value, key, lineno));
    } else if (key == "max_tile_area") {
      cfg.max_tile_area = static_cast<int>(parse_number(value, key, lineno));
    } else if (key == "base_sigmas") {
      cfg.base_sigmas = parse_sigma_list(value, lineno);
    } else {
      throw ParseError("config line " + std::to_string(lineno) + ": unknown key " + key);
    }
  }
  cfg.validate();
  return cfg;
}

DetectorConfig load_detector_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  return parse_detector_config(in);
}

} // namespace hhfreak
