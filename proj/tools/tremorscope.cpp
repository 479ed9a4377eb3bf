// tremorscope CLI: magnify | detect | synth | report | bench
//
// Exit codes: 0 success, 2 config error, 3 I/O error, 4 processing error.
// Progress lines on stderr are machine-parseable key=value pairs.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tremorscope/tremorscope.hpp"

namespace ts = tremorscope;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitProcessing = 4;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void progress(const std::string& line) { std::cerr << line << "\n"; }

struct CommonFlags {
  std::string config_file;
  ts::RunConfig rc;

  // Deferred flag values; only applied when the flag was actually given so
  // the config file keeps its say otherwise.
  std::vector<std::pair<CLI::Option*, std::function<void(ts::RunConfig&)>>> overrides;

  void add_override(CLI::Option* opt, std::function<void(ts::RunConfig&)> fn) {
    overrides.emplace_back(opt, std::move(fn));
  }

  void finalize() {
    if (!config_file.empty()) rc = ts::RunConfig::load(config_file);
    for (auto& [opt, fn] : overrides)
      if (opt->count() > 0) fn(rc);
    if (rc.threads > 0) ts::set_max_threads(rc.threads);
  }
};

// Shared flag set; every flag maps onto a RunConfig key (see README for the
// config-file equivalents). Flags win over the file.
void add_common_flags(CLI::App* cmd, CommonFlags& cf) {
  cmd->add_option("--config", cf.config_file, "key=value config file");
  auto opt = [&cf, cmd](const char* flag, const char* help, std::string key) {
    auto holder = std::make_shared<std::string>();
    CLI::Option* o = cmd->add_option(flag, *holder, help);
    cf.add_override(o, [holder, key](ts::RunConfig& rc) { rc.set(key, *holder); });
    return o;
  };
  opt("--mode", "magnification mode: static|dynamic|temporal", "mode");
  opt("--alpha", "amplification factor (default 10, temporal 20)", "alpha");
  opt("--band", "temporal filter band LO:HI in Hz", "band");
  opt("--depth", "pyramid depth (0 = auto)", "depth");
  opt("--chroma-gain", "fraction of alpha applied to chroma [0,1]", "chroma_gain");
  opt("--taper", "per-level alpha multipliers, comma separated", "taper");
  opt("--tremor-band", "tremor band LO:HI in Hz", "tremor_band");
  opt("--breathing-band", "breathing band LO:HI in Hz", "breathing_band");
  opt("--movement-band", "movement band LO:HI in Hz", "movement_band");
  opt("--threshold", "tremor score threshold in [0,1]", "threshold");
  opt("--window", "analysis window length in seconds", "window_s");
  opt("--overlap", "window overlap fraction [0,1)", "overlap");
  opt("--min-duration", "minimum episode duration in seconds", "min_duration_s");
  opt("--prominence-db", "required tremor peak over median bin, dB", "prominence_db");
  opt("--fps", "frame rate for frame-directory input", "fps");
  opt("--threads", "worker thread cap (0 = all cores)", "threads");
  opt("--seed", "seed for synthetic noise", "seed");
  auto regions = std::make_shared<std::vector<std::string>>();
  CLI::Option* ro = cmd->add_option("--region", *regions, "analysis region x,y,w,h (repeatable)");
  cf.add_override(ro, [regions](ts::RunConfig& rc) {
    rc.regions.clear();
    for (const auto& r : *regions) rc.set("region", r);
  });
}

ts::VideoSequence load_input(const std::string& path, const ts::RunConfig& rc) {
  return ts::load_sequence(path, ts::SequenceFormat::kAuto, rc.fps);
}

// ---- magnify ----

struct MagnifyArgs {
  CommonFlags cf;
  std::string input, output;
  bool stream = false;
};

int run_magnify(MagnifyArgs& a) {
  a.cf.finalize();
  ts::RunConfig& rc = a.cf.rc;
  const ts::MagnificationConfig cfg = rc.magnification();

  if (a.stream) {
    if (cfg.mode == ts::Mode::kTemporal && !(cfg.band_lo > 0.0 && cfg.band_lo < cfg.band_hi))
      throw ts::ConfigError("temporal mode requires --band LO:HI");
    ts::Y4mReader reader(std::cin);
    cfg.validate(reader.fps());
    ts::Y4mWriter writer(std::cout, reader.width(), reader.height(), reader.fps());
    ts::StreamMagnifier magnifier(cfg, reader.fps(), reader.width(), reader.height());
    const auto start = Clock::now();
    long frames = 0;
    while (auto frame = reader.next()) {
      writer.write(magnifier.step(*frame));
      ++frames;
    }
    const double dt = seconds_since(start);
    progress("mode=" + ts::to_string(cfg.mode) + " frames=" + std::to_string(frames) +
             " fps_achieved=" + std::to_string(frames / std::max(dt, 1e-9)));
    return 0;
  }

  if (a.input.empty() || a.output.empty())
    throw ts::ConfigError("magnify requires input and output paths (or --stream)");
  const ts::VideoSequence seq = load_input(a.input, rc);
  cfg.validate(seq.fps);

  const auto start = Clock::now();
  const ts::VideoSequence out = ts::magnify(seq, cfg);
  const double dt = seconds_since(start);
  ts::save_sequence(out, a.output);
  progress("mode=" + ts::to_string(cfg.mode) + " frames=" + std::to_string(out.frame_count()) +
           " alpha=" + std::to_string(cfg.alpha) +
           " fps_achieved=" + std::to_string(out.frame_count() / std::max(dt, 1e-9)));
  return 0;
}

// ---- detect ----

struct DetectArgs {
  CommonFlags cf;
  std::string input, report_out, csv_out, magnify_first;
};

int run_detect(DetectArgs& a) {
  a.cf.finalize();
  ts::RunConfig& rc = a.cf.rc;

  ts::VideoSequence seq = load_input(a.input, rc);
  nlohmann::ordered_json echo = rc.echo();
  if (!a.magnify_first.empty()) {
    const auto comma = a.magnify_first.find(',');
    if (comma == std::string::npos)
      throw ts::ConfigError("--magnify-first expects MODE,ALPHA (e.g. dynamic,10)");
    ts::RunConfig pre;
    pre.set("mode", a.magnify_first.substr(0, comma));
    pre.set("alpha", a.magnify_first.substr(comma + 1));
    pre.band_lo = rc.band_lo;
    pre.band_hi = rc.band_hi;
    const ts::MagnificationConfig mcfg = pre.magnification();
    mcfg.validate(seq.fps);
    const auto start = Clock::now();
    seq = ts::magnify(seq, mcfg);
    progress("magnify_first=" + a.magnify_first +
             " seconds=" + std::to_string(seconds_since(start)));
    echo["magnify_first"] = a.magnify_first;
  }

  const ts::DetectorConfig dcfg = rc.detector();
  const ts::DetectionResult result = ts::detect_tremor(seq, dcfg, rc.regions);

  const ts::TremorReport report =
      ts::make_report(std::filesystem::path(a.input).filename().string(), seq.duration_s(),
                      std::move(echo), result.episodes);
  const std::string doc = ts::emit_report(report);
  if (a.report_out.empty()) {
    std::cout << doc;
  } else {
    std::ofstream out(a.report_out);
    if (!out) throw ts::IoError("cannot write report to " + a.report_out);
    out << doc;
  }
  if (!a.csv_out.empty()) {
    std::ofstream out(a.csv_out);
    if (!out) throw ts::IoError("cannot write CSV to " + a.csv_out);
    out << ts::episodes_csv(report.episodes);
  }
  progress("episodes=" + std::to_string(report.episodes.size()) +
           " flagged_seconds=" + std::to_string(report.flagged_seconds()) +
           " max_window_score=" + std::to_string(result.max_score()));
  return 0;
}

// ---- synth ----

struct SynthArgs {
  CommonFlags cf;
  std::string out, truth, texture = "noise", kind = "translate-sin", label = "motion";
  std::string size = "128x128";
  double amplitude = 0.2, frequency = 2.0, amplitude2 = 0.0, frequency2 = 0.0;
  double angle_rate = 0.0, duration = 5.0, clip_fps = 30.0, noise_sigma = 0.0;
  double active_start = 0.0, active_end = -1.0;
  int overscan = 8;
};

std::pair<int, int> parse_size(const std::string& s) {
  int w = 0, h = 0;
  char extra;
  if (std::sscanf(s.c_str(), "%dx%d%c", &w, &h, &extra) != 2 || w < 8 || h < 8)
    throw ts::ConfigError("bad size '" + s + "' (expected WxH, at least 8x8)");
  return {w, h};
}

int run_synth(SynthArgs& a) {
  a.cf.finalize();
  if (a.out.empty()) throw ts::ConfigError("synth requires --out");
  const auto [fw, fh] = parse_size(a.size);

  ts::MotionSpec spec;
  spec.kind = ts::motion_kind_from_string(a.kind);
  spec.amplitude_px = a.amplitude;
  spec.frequency_hz = a.frequency;
  spec.amplitude2_px = a.amplitude2;
  spec.frequency2_hz = a.frequency2;
  spec.angle_rate_deg = a.angle_rate;
  spec.duration_s = a.duration;
  spec.fps = a.clip_fps;
  spec.noise_sigma = a.noise_sigma;
  spec.active_start_s = a.active_start;
  spec.active_end_s = a.active_end;
  spec.overscan_px = a.overscan;
  spec.seed = a.cf.rc.seed;
  spec.label = a.label;

  const int tw = fw + 2 * spec.overscan_px;
  const int th = fh + 2 * spec.overscan_px;
  ts::Frame texture;
  if (a.texture == "noise") {
    texture = ts::make_noise_texture(tw, th, spec.seed + 1);
  } else if (a.texture == "blob") {
    texture = ts::make_blob_texture(tw, th, std::min(fw, fh) / 12.0);
  } else if (a.texture == "bar") {
    texture = ts::make_bar_texture(tw, th);
  } else if (a.texture == "disc") {
    texture = ts::make_disc_texture(tw, th, std::min(fw, fh) / 3.0);
  } else {
    throw ts::ConfigError("unknown texture '" + a.texture + "' (noise|blob|bar|disc)");
  }

  const ts::SynthClip clip = ts::render_clip(texture, spec);
  ts::save_sequence(clip.seq, a.out);
  const std::string truth_path = a.truth.empty() ? a.out + ".truth.txt" : a.truth;
  ts::write_ground_truth(truth_path, clip.truth);
  progress("frames=" + std::to_string(clip.seq.frame_count()) + " out=" + a.out +
           " truth=" + truth_path);
  return 0;
}

// ---- report ----

struct ReportArgs {
  CommonFlags cf;
  std::string input, csv_out;
};

int run_report(ReportArgs& a) {
  a.cf.finalize();
  std::ifstream in(a.input);
  if (!in) throw ts::IoError("cannot open report " + a.input);
  std::stringstream ss;
  ss << in.rdbuf();
  const ts::TremorReport report = ts::parse_report(ss.str());
  if (!a.csv_out.empty()) {
    std::ofstream out(a.csv_out);
    if (!out) throw ts::IoError("cannot write CSV to " + a.csv_out);
    out << ts::episodes_csv(report.episodes);
  }
  std::cout << "source=" << report.source << " duration_s=" << report.duration_s
            << " episodes=" << report.episodes.size()
            << " flagged_seconds=" << report.flagged_seconds()
            << " flagged_fraction=" << report.flagged_fraction()
            << " max_score=" << report.max_score() << "\n";
  return 0;
}

// ---- bench ----

struct BenchArgs {
  CommonFlags cf;
  std::string res = "640x480";
  double seconds = 3.0;
  double clip_fps = 30.0;
};

int run_bench(BenchArgs& a) {
  a.cf.finalize();
  ts::RunConfig& rc = a.cf.rc;
  const auto [w, h] = parse_size(a.res);
  if (rc.depth == 0) rc.depth = 4;
  ts::MagnificationConfig cfg = rc.magnification();
  if (cfg.mode == ts::Mode::kTemporal && cfg.band_hi <= 0) {
    cfg.band_lo = 1.0;
    cfg.band_hi = 3.0;
  }
  cfg.validate(a.clip_fps);

  // One noise texture jittered sub-pixel per frame: realistic pyramid content
  // without benchmarking the generator itself.
  const int chunk = 16;
  ts::MotionSpec spec;
  spec.kind = ts::MotionKind::kTranslateSin;
  spec.amplitude_px = 0.4;
  spec.frequency_hz = 2.0;
  spec.duration_s = chunk / a.clip_fps;
  spec.fps = a.clip_fps;
  spec.seed = rc.seed;
  const ts::Frame texture = ts::make_noise_texture(w + 16, h + 16, rc.seed + 1);
  ts::SynthClip clip = ts::render_clip(texture, spec);

  const long total_frames = std::max(1L, std::lround(a.seconds * a.clip_fps));
  long done = 0;
  double elapsed = 0;
  if (cfg.mode == ts::Mode::kTemporal) {
    ts::StreamMagnifier magnifier(cfg, a.clip_fps, w, h);
    while (done < total_frames) {
      const ts::Frame& f = clip.seq.frames[done % clip.seq.frame_count()];
      const auto start = Clock::now();
      (void)magnifier.step(f);
      elapsed += seconds_since(start);
      ++done;
    }
  } else {
    while (done < total_frames) {
      const auto start = Clock::now();
      const ts::VideoSequence out = ts::magnify(clip.seq, cfg);
      elapsed += seconds_since(start);
      // frame 0 is a pass-through in static/dynamic modes; count work frames
      done += static_cast<long>(out.frame_count()) - 1;
    }
  }
  const double fps = done / std::max(elapsed, 1e-9);
  std::cout << "bench res=" << w << "x" << h << " mode=" << ts::to_string(cfg.mode)
            << " depth=" << cfg.depth << " frames=" << done << " elapsed_s=" << elapsed
            << " fps=" << fps << " threads=" << ts::worker_count() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eulerian motion magnification and tremor detection for bedside video"};
  app.require_subcommand(1);

  MagnifyArgs magnify_args;
  CLI::App* magnify = app.add_subcommand("magnify", "motion-magnify a clip");
  magnify->add_option("input", magnify_args.input, "input clip (frame dir or .y4m)");
  magnify->add_option("output", magnify_args.output, "output clip (dir or .y4m)");
  magnify->add_flag("--stream", magnify_args.stream, "y4m filter: stdin -> stdout");
  add_common_flags(magnify, magnify_args.cf);

  DetectArgs detect_args;
  CLI::App* detect = app.add_subcommand("detect", "score tremor episodes in a clip");
  detect->add_option("input", detect_args.input, "input clip (frame dir or .y4m)")->required();
  detect->add_option("--report-out", detect_args.report_out, "report path (default stdout)");
  detect->add_option("--csv", detect_args.csv_out, "also export episodes as CSV");
  detect->add_option("--magnify-first", detect_args.magnify_first,
                     "magnify before detecting, MODE,ALPHA");
  add_common_flags(detect, detect_args.cf);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "generate a ground-truth test clip");
  synth->add_option("--out", synth_args.out, "output clip (dir or .y4m)")->required();
  synth->add_option("--truth", synth_args.truth, "ground-truth sidecar (default OUT.truth.txt)");
  synth->add_option("--texture", synth_args.texture, "noise|blob|bar|disc");
  synth->add_option("--kind", synth_args.kind,
                    "translate-sin|translate-ramp|rotate|composite");
  synth->add_option("--size", synth_args.size, "frame size WxH");
  synth->add_option("--amplitude", synth_args.amplitude, "displacement amplitude px");
  synth->add_option("--frequency", synth_args.frequency, "motion frequency Hz");
  synth->add_option("--amplitude2", synth_args.amplitude2, "composite y amplitude px");
  synth->add_option("--frequency2", synth_args.frequency2, "composite y frequency Hz");
  synth->add_option("--angle-rate", synth_args.angle_rate, "rotation deg/frame");
  synth->add_option("--duration", synth_args.duration, "clip length seconds");
  synth->add_option("--clip-fps", synth_args.clip_fps, "clip frame rate");
  synth->add_option("--noise-sigma", synth_args.noise_sigma, "luma noise sigma");
  synth->add_option("--active-start", synth_args.active_start, "motion start time s");
  synth->add_option("--active-end", synth_args.active_end, "motion end time s (-1 = clip end)");
  synth->add_option("--overscan", synth_args.overscan, "texture overscan px");
  synth->add_option("--label", synth_args.label, "ground-truth label for moving frames");
  add_common_flags(synth, synth_args.cf);

  ReportArgs report_args;
  CLI::App* report = app.add_subcommand("report", "validate / convert a report");
  report->add_option("input", report_args.input, "report JSON path")->required();
  report->add_option("--csv", report_args.csv_out, "export episodes as CSV");
  add_common_flags(report, report_args.cf);

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "throughput benchmark on synthetic frames");
  bench->add_option("--res", bench_args.res, "resolution WxH (default 640x480)");
  bench->add_option("--seconds", bench_args.seconds, "amount of video to process");
  bench->add_option("--clip-fps", bench_args.clip_fps, "nominal frame rate");
  add_common_flags(bench, bench_args.cf);

  try {
    app.parse(argc, argv);
    if (*magnify) return run_magnify(magnify_args);
    if (*detect) return run_detect(detect_args);
    if (*synth) return run_synth(synth_args);
    if (*report) return run_report(report_args);
    if (*bench) return run_bench(bench_args);
    return kExitConfig;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  } catch (const ts::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ts::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "processing error: " << e.what() << "\n";
    return kExitProcessing;
  }
}
