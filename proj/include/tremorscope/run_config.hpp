#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tremorscope/detector.hpp"
#include "tremorscope/magnifier.hpp"
#include "tremorscope/types.hpp"

// Merged run configuration: an optional key=value config file, overridden by
// command-line flags. Every flag has a file equivalent under the same key;
// the effective configuration is echoed into every report.

namespace tremorscope {

struct RunConfig {
  // magnification
  std::string mode = "dynamic";
  double alpha = -1;  // < 0: use the mode default (10 static/dynamic, 20 temporal)
  double band_lo = 0;
  double band_hi = 0;
  int depth = 0;
  double chroma_gain = 0;
  std::vector<double> taper;

  // detection
  BandSpec bands;
  double threshold = 0.5;
  double window_s = 4.0;
  double overlap = 0.5;
  double min_duration_s = 2.0;
  double prominence_db = 20.0;
  std::vector<Rect> regions;

  // io / run
  double fps = 0;  // frame-dir timing
  int threads = 0;
  std::uint64_t seed = 0;

  double effective_alpha() const {
    return alpha >= 0 ? alpha : MagnificationConfig::default_alpha(mode_enum());
  }
  Mode mode_enum() const { return mode_from_string(mode); }

  MagnificationConfig magnification() const {
    MagnificationConfig cfg;
    cfg.mode = mode_enum();
    cfg.alpha = effective_alpha();
    cfg.band_lo = band_lo;
    cfg.band_hi = band_hi;
    cfg.depth = depth;
    cfg.chroma_gain = chroma_gain;
    cfg.level_taper = taper;
    return cfg;
  }

  DetectorConfig detector() const {
    DetectorConfig cfg;
    cfg.bands = bands;
    cfg.threshold = threshold;
    cfg.window_s = window_s;
    cfg.overlap = overlap;
    cfg.min_duration_s = min_duration_s;
    cfg.prominence_db = prominence_db;
    return cfg;
  }

  /// Apply one key=value pair (shared by the file parser and flag merging).
  void set(const std::string& key, const std::string& value) {
    if (key == "mode") {
      mode_from_string(value);  // validate now, fail with a precise message
      mode = value;
    } else if (key == "alpha") {
      alpha = parse_double(key, value);
      if (alpha < 0) throw ConfigError("alpha must be >= 0");
    } else if (key == "band") {
      parse_band(value, band_lo, band_hi);
    } else if (key == "depth") {
      depth = static_cast<int>(parse_double(key, value));
    } else if (key == "chroma_gain") {
      chroma_gain = parse_double(key, value);
    } else if (key == "taper") {
      taper = parse_list(key, value);
    } else if (key == "tremor_band") {
      parse_band(value, bands.tremor_lo, bands.tremor_hi);
    } else if (key == "breathing_band") {
      parse_band(value, bands.breathing_lo, bands.breathing_hi);
    } else if (key == "movement_band") {
      parse_band(value, bands.movement_lo, bands.movement_hi);
    } else if (key == "threshold") {
      threshold = parse_double(key, value);
      if (threshold < 0 || threshold > 1) throw ConfigError("threshold must lie in [0,1]");
    } else if (key == "window_s") {
      window_s = parse_double(key, value);
    } else if (key == "overlap") {
      overlap = parse_double(key, value);
    } else if (key == "min_duration_s") {
      min_duration_s = parse_double(key, value);
    } else if (key == "prominence_db") {
      prominence_db = parse_double(key, value);
    } else if (key == "region") {
      regions.push_back(parse_rect(value));
    } else if (key == "fps") {
      fps = parse_double(key, value);
    } else if (key == "threads") {
      threads = static_cast<int>(parse_double(key, value));
    } else if (key == "seed") {
      seed = static_cast<std::uint64_t>(parse_double(key, value));
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }

  /// Parse a config file of `key = value` lines ('#' starts a comment).
  static RunConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                          ": expected key = value");
      try {
        cfg.set(trim(trimmed.substr(0, eq)), trim(trimmed.substr(eq + 1)));
      } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
    return cfg;
  }

  nlohmann::ordered_json echo() const {
    nlohmann::ordered_json j;
    j["mode"] = mode;
    j["alpha"] = effective_alpha();
    if (band_hi > 0) j["band"] = {band_lo, band_hi};
    j["depth"] = depth;
    j["chroma_gain"] = chroma_gain;
    if (!taper.empty()) j["taper"] = taper;
    j["tremor_band"] = {bands.tremor_lo, bands.tremor_hi};
    j["breathing_band"] = {bands.breathing_lo, bands.breathing_hi};
    j["movement_band"] = {bands.movement_lo, bands.movement_hi};
    j["threshold"] = threshold;
    j["window_s"] = window_s;
    j["overlap"] = overlap;
    j["min_duration_s"] = min_duration_s;
    j["prominence_db"] = prominence_db;
    auto regs = nlohmann::ordered_json::array();
    for (const Rect& r : regions) regs.push_back({r.x, r.y, r.w, r.h});
    j["regions"] = regs;
    if (fps > 0) j["fps"] = fps;
    j["threads"] = threads;
    j["seed"] = seed;
    return j;
  }

  static Rect parse_rect(const std::string& s) {
    Rect r;
    char extra;
    if (std::sscanf(s.c_str(), "%d,%d,%d,%d%c", &r.x, &r.y, &r.w, &r.h, &extra) != 4)
      throw ConfigError("bad region '" + s + "' (expected x,y,w,h)");
    if (r.w <= 0 || r.h <= 0) throw ConfigError("region must have positive size");
    return r;
  }

  static void parse_band(const std::string& s, double& lo, double& hi) {
    char extra;
    if (std::sscanf(s.c_str(), "%lf:%lf%c", &lo, &hi, &extra) != 2 || !(lo < hi))
      throw ConfigError("bad band '" + s + "' (expected LO:HI with LO < HI)");
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
  }

  static double parse_double(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(value, &pos);
    } catch (const std::exception&) {
      throw ConfigError("bad numeric value for '" + key + "': " + value);
    }
    if (pos != value.size()) throw ConfigError("bad numeric value for '" + key + "': " + value);
    return v;
  }

  static std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ','))
      out.push_back(parse_double(key, item));
    if (out.empty()) throw ConfigError("empty list for '" + key + "'");
    return out;
  }
};

}  // namespace tremorscope
