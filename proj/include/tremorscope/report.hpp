#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tremorscope/detector.hpp"
#include "tremorscope/types.hpp"

// Machine-readable tremor reports. One JSON document per input clip, schema
// versioned, deterministic key order, lossless emit/parse round trip.

namespace tremorscope {

inline constexpr int kReportSchemaVersion = 1;

struct TremorReport {
  std::string source;
  double duration_s = 0;
  nlohmann::ordered_json config;  // effective-config echo
  std::vector<TremorEpisode> episodes;

  double flagged_seconds() const {
    double s = 0;
    for (const auto& ep : episodes) s += ep.end_s - ep.start_s;
    return s;
  }
  double flagged_fraction() const {
    return duration_s > 0 ? flagged_seconds() / duration_s : 0.0;
  }
  double max_score() const {
    double m = 0;
    for (const auto& ep : episodes) m = std::max(m, ep.score);
    return m;
  }

  bool operator==(const TremorReport& other) const {
    if (source != other.source || duration_s != other.duration_s || config != other.config ||
        episodes.size() != other.episodes.size())
      return false;
    for (std::size_t i = 0; i < episodes.size(); ++i) {
      const auto& a = episodes[i];
      const auto& b = other.episodes[i];
      if (a.start_s != b.start_s || a.end_s != b.end_s || a.tremor_energy != b.tremor_energy ||
          a.total_energy != b.total_energy || a.score != b.score || a.flagged != b.flagged)
        return false;
    }
    return true;
  }
};

/// Validate invariants and assemble a report.
inline TremorReport make_report(std::string source, double duration_s,
                                nlohmann::ordered_json config,
                                std::vector<TremorEpisode> episodes) {
  double prev_end = -1;
  for (const auto& ep : episodes) {
    if (!(ep.end_s > ep.start_s)) throw ProcessingError("episode must end after it starts");
    if (ep.start_s < prev_end) throw ProcessingError("episodes overlap or are unsorted");
    if (!(ep.score >= 0 && ep.score <= 1)) throw ProcessingError("episode score outside [0,1]");
    prev_end = ep.end_s;
  }
  TremorReport r{std::move(source), duration_s, std::move(config), std::move(episodes)};
  if (r.flagged_seconds() > r.duration_s + 1e-9)
    throw ProcessingError("flagged seconds exceed clip duration");
  return r;
}

inline std::string emit_report(const TremorReport& report) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["source"] = report.source;
  doc["duration_s"] = report.duration_s;
  doc["config"] = report.config;
  doc["episodes"] = nlohmann::ordered_json::array();
  for (const auto& ep : report.episodes) {
    nlohmann::ordered_json e;
    e["start_s"] = ep.start_s;
    e["end_s"] = ep.end_s;
    e["tremor_energy"] = ep.tremor_energy;
    e["total_energy"] = ep.total_energy;
    e["score"] = ep.score;
    e["flag"] = ep.flagged;
    doc["episodes"].push_back(std::move(e));
  }
  doc["summary"] = {{"flagged_seconds", report.flagged_seconds()},
                    {"flagged_fraction", report.flagged_fraction()},
                    {"max_score", report.max_score()}};
  return doc.dump(2) + "\n";
}

inline TremorReport parse_report(std::string_view text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed report document: ") + e.what());
  }
  try {
    if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer())
      throw IoError("report missing schema_version");
    const int version = doc["schema_version"].get<int>();
    if (version != kReportSchemaVersion)
      throw IoError("unknown report schema version " + std::to_string(version));
    TremorReport r;
    r.source = doc.at("source").get<std::string>();
    r.duration_s = doc.at("duration_s").get<double>();
    r.config = doc.value("config", nlohmann::ordered_json::object());
    for (const auto& e : doc.at("episodes")) {
      TremorEpisode ep;
      ep.start_s = e.at("start_s").get<double>();
      ep.end_s = e.at("end_s").get<double>();
      ep.tremor_energy = e.at("tremor_energy").get<double>();
      ep.total_energy = e.at("total_energy").get<double>();
      ep.score = e.at("score").get<double>();
      ep.flagged = e.at("flag").get<bool>();
      r.episodes.push_back(ep);
    }
    return make_report(std::move(r.source), r.duration_s, std::move(r.config),
                       std::move(r.episodes));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed report document: ") + e.what());
  } catch (const ProcessingError& e) {
    throw IoError(std::string("invalid report content: ") + e.what());
  }
}

/// Secondary CSV export of the episode list.
inline std::string episodes_csv(std::span<const TremorEpisode> episodes) {
  std::string out = "start_s,end_s,duration_s,score,tremor_energy,total_energy,flag\n";
  char buf[256];
  for (const auto& ep : episodes) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.9g,%.9g,%.9g,%d\n", ep.start_s, ep.end_s,
                  ep.end_s - ep.start_s, ep.score, ep.tremor_energy, ep.total_energy,
                  ep.flagged ? 1 : 0);
    out += buf;
  }
  return out;
}

}  // namespace tremorscope
