// Acceptance suite: one test per acceptance criterion, one PASS/FAIL line
// each. Oracles: phase-correlation displacement measurement, direct tone
// projection, synthetic ground truth.

#include <gtest/gtest.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <regex>
#include <sstream>

#include "test_util.hpp"
#include "tremorscope/tremorscope.hpp"

using namespace tremorscope;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

class Acceptance : public ::testing::Test {
 protected:
  void criterion(int n, const std::string& name) {
    n_ = n;
    name_ = name;
  }
  void note(const std::string& s) { notes_ += "  " + s + "\n"; }

  void TearDown() override {
    std::printf("[criterion %d] %s: %s\n%s", n_, name_.c_str(),
                HasFailure() ? "FAIL" : "PASS", notes_.c_str());
    std::fflush(stdout);
  }

  int n_ = 0;
  std::string name_;
  std::string notes_;
};

// Textures for the magnification-law clips: smooth enough that the magnified
// displacement stays inside the first-order region (dominant wavelength well
// above 8x the output displacement, so 256 px frames with a depth-7 pyramid),
// mid-gray so no clamping occurs.
Frame law_texture(int which, std::uint64_t seed) {
  switch (which) {
    case 0: {
      Frame f = make_noise_texture(272, 272, seed, 20.0);
      for (std::size_t i = 0; i < f.y.size(); ++i)
        f.y.data()[i] = 0.5 + 0.5 * (f.y.data()[i] - 0.5);
      return f;
    }
    case 1:
      return make_blob_texture(272, 272, 20.0);
    default:
      return make_bar_texture(272, 272, 24.0, 14.0);
  }
}

SynthClip law_clip(int texture, double amplitude) {
  MotionSpec spec;
  spec.kind = MotionKind::kTranslateSin;
  spec.amplitude_px = amplitude;
  spec.frequency_hz = 2.0;
  spec.fps = 30.0;
  spec.duration_s = 5.0;
  return render_clip(law_texture(texture, 1000 + texture), spec);
}

// Peak displacement, measured at the frames where the commanded sinusoid is
// within 1% of its crest (the peak happens there by construction).
double measured_peak_displacement(const VideoSequence& out, const SynthClip& clip,
                                  double amplitude) {
  const int T = static_cast<int>(out.frame_count());
  std::vector<int> peak_frames;
  for (int t = 1; t < T; ++t)
    if (std::abs(clip.truth[t].dx) >= 0.99 * amplitude) peak_frames.push_back(t);
  std::vector<double> dx(peak_frames.size(), 0.0);
  parallel_for(0, static_cast<int>(peak_frames.size()), [&](int i) {
    dx[i] = std::abs(measure_displacement(out.frames[0], out.frames[peak_frames[i]]).dx);
  });
  double peak = 0;
  for (double v : dx) peak = std::max(peak, v);
  return peak;
}

// ---- detector corpus (criteria 6 and 7) ----

struct CorpusClip {
  SynthClip clip;
  bool tremor = false;
  double truth_start = 0;
  double truth_end = 0;
};

CorpusClip corpus_clip(int i, bool tremor) {
  MotionSpec spec;
  spec.kind = MotionKind::kTranslateSin;
  spec.fps = 30.0;
  spec.duration_s = 20.0;
  spec.noise_sigma = 0.003;
  spec.seed = 7000 + i;
  CorpusClip c;
  c.tremor = tremor;
  if (tremor) {
    spec.amplitude_px = 0.6 + 0.08 * (i % 8);
    spec.frequency_hz = 5.0 + 0.35 * (i % 9);  // 5.0 .. 7.8 Hz
    spec.active_start_s = 2.0 + (i % 3);
    spec.active_end_s = spec.active_start_s + 6.0 + (i % 4) * 2.0;  // >= 6 s of tremor
    spec.label = "tremor";
    c.truth_start = spec.active_start_s;
    c.truth_end = spec.active_end_s;
  } else {
    spec.amplitude_px = 1.0 + 0.15 * (i % 8);
    spec.frequency_hz = 0.5 + 0.055 * (i % 10);  // 0.5 .. 1.0 Hz
    spec.label = "breathing";
  }
  const int texture = i % 3;
  Frame tex = texture == 0   ? make_bar_texture(80, 80)
              : texture == 1 ? make_blob_texture(80, 80, 5.0)
                             : make_noise_texture(80, 80, spec.seed, 2.0);
  c.clip = render_clip(tex, spec);
  return c;
}

}  // namespace

// 1. Magnification law at the default amplification factors.
TEST_F(Acceptance, MagnificationLaw) {
  criterion(1, "magnification law: measured peak = (1+alpha)*A within 15%");
  const auto t0 = Clock::now();

  struct Case {
    Mode mode;
    double alpha;
  };
  const Case cases[] = {{Mode::kStatic, 10.0}, {Mode::kTemporal, 20.0}};
  const char* texture_names[] = {"noise", "blob", "bar"};

  for (const Case& c : cases) {
    MagnificationConfig cfg;
    cfg.mode = c.mode;
    cfg.alpha = c.alpha;
    cfg.depth = 7;
    if (c.mode == Mode::kTemporal) {
      cfg.band_lo = 1.0;
      cfg.band_hi = 3.0;
    }
    for (int texture = 0; texture < 3; ++texture) {
      for (double amplitude : {0.1, 0.2, 0.3}) {
        const SynthClip clip = law_clip(texture, amplitude);
        const VideoSequence out = magnify(clip.seq, cfg);
        const double peak = measured_peak_displacement(out, clip, amplitude);
        const double expected = (1.0 + c.alpha) * amplitude;
        const double rel = std::abs(peak - expected) / expected;
        EXPECT_LE(rel, 0.15) << to_string(c.mode) << " " << texture_names[texture] << " A="
                             << amplitude << " peak=" << peak << " expected=" << expected;
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-8s %-5s A=%.1f: peak %.3f px vs %.2f px (%+.1f%%)",
                      to_string(c.mode).c_str(), texture_names[texture], amplitude, peak,
                      expected, 100.0 * (peak - expected) / expected);
        note(buf);
      }
    }
  }
  const double dt = seconds_since(t0);
  note("runtime " + std::to_string(dt) + " s (budget 120 s)");
  EXPECT_LT(dt, 120.0);
}

// 2. Identity family: no motion, alpha=0, or ref=cur leaves frames intact.
TEST_F(Acceptance, IdentitySuite) {
  criterion(2, "identity suite: PSNR >= 48 dB, chroma bit-identical");
  const auto t0 = Clock::now();

  MotionSpec spec;
  spec.kind = MotionKind::kTranslateSin;
  spec.amplitude_px = 0.25;
  spec.frequency_hz = 2.0;
  spec.duration_s = 1.0;
  const SynthClip moving = render_clip(make_noise_texture(96, 96, 21), spec);
  spec.amplitude_px = 0.0;
  const SynthClip still = render_clip(make_noise_texture(96, 96, 22), spec);

  double worst_psnr = 1e9;
  auto check_identity = [&](const VideoSequence& in, const VideoSequence& out) {
    for (std::size_t t = 0; t < in.frame_count(); ++t) {
      worst_psnr = std::min(worst_psnr, ts_test::psnr(out.frames[t].y, in.frames[t].y));
      EXPECT_EQ(ts_test::max_abs_diff(out.frames[t].cb, in.frames[t].cb), 0.0);
      EXPECT_EQ(ts_test::max_abs_diff(out.frames[t].cr, in.frames[t].cr), 0.0);
    }
  };

  for (Mode mode : {Mode::kStatic, Mode::kDynamic, Mode::kTemporal}) {
    MagnificationConfig cfg;
    cfg.mode = mode;
    cfg.alpha = 0.0;
    if (mode == Mode::kTemporal) {
      cfg.band_lo = 1.0;
      cfg.band_hi = 3.0;
    }
    check_identity(moving.seq, magnify(moving.seq, cfg));  // alpha = 0
    cfg.alpha = MagnificationConfig::default_alpha(mode);
    check_identity(still.seq, magnify(still.seq, cfg));  // zero motion
  }

  // ref = cur manipulation is exact
  const Pyramid pyr = build_laplacian(moving.seq.frames[0].y, 3);
  const Pyramid same = manipulate(pyr, pyr, 50.0, std::vector<double>{1.0, 1.0, 1.0});
  for (int k = 0; k < 3; ++k)
    EXPECT_EQ(ts_test::max_abs_diff(same.levels[k], pyr.levels[k]), 0.0);

  EXPECT_GE(worst_psnr, 48.0);
  note("worst identity PSNR " + std::to_string(worst_psnr) + " dB");
  const double dt = seconds_since(t0);
  note("runtime " + std::to_string(dt) + " s (budget 30 s)");
  EXPECT_LT(dt, 30.0);
}

// 3. Pyramid perfect reconstruction across sizes and depths.
TEST_F(Acceptance, PyramidReconstruction) {
  criterion(3, "pyramid reconstruction PSNR >= 48 dB (105 images, depths 1-5)");
  const int sizes[] = {64, 96, 128, 192, 257, 320, 512};
  double worst = 1e9;
  for (int i = 0; i < 100; ++i) {
    const int w = sizes[i % 7];
    const int h = sizes[(i + 3) % 7];
    const int depth = 1 + i % 5;
    const Plane img = ts_test::random_plane(w, h, 3000 + i);
    worst = std::min(worst, ts_test::psnr(collapse(build_laplacian(img, depth)), img));
  }
  for (int i = 0; i < 5; ++i) {
    const int size = 64 + i * 112;  // 64 .. 512
    const Plane img = ts_test::natural_plane(size, size, 4000 + i);
    worst = std::min(worst, ts_test::psnr(collapse(build_laplacian(img, 1 + i)), img));
  }
  EXPECT_GE(worst, 48.0);
  note("worst reconstruction PSNR " + std::to_string(worst) + " dB");
}

// 4. Temporal filter frequency response, offline and streaming.
TEST_F(Acceptance, TemporalFilterResponse) {
  criterion(4, "temporal filter: in-band +/-5%, out-of-band >= 20 dB, IIR within 3 dB");

  // offline ideal filter on an exact-bin sinusoid
  std::vector<double> tone(150);
  for (int t = 0; t < 150; ++t)
    tone[t] = 0.5 + 0.2 * std::sin(2 * std::numbers::pi * 2.0 * t / 30.0);
  const auto passed = ideal_bandpass(tone, 30.0, 1.0, 3.0);
  const double gain = ts_test::tone_amplitude(passed, 30.0, 2.0) / 0.2;
  EXPECT_NEAR(gain, 1.0, 0.05);
  note("offline in-band gain " + std::to_string(gain));

  const auto rejected = ideal_bandpass(tone, 30.0, 4.0, 8.0);
  const double leak = ts_test::tone_amplitude(rejected, 30.0, 2.0) / 0.2;
  const double atten_db = leak > 0 ? -20.0 * std::log10(leak) : 300.0;
  EXPECT_GE(atten_db, 20.0);
  note("offline out-of-band attenuation " + std::to_string(atten_db) + " dB");

  // streaming IIR against the offline path on a 300-frame clip
  VideoSequence seq;
  seq.fps = 30;
  for (int t = 0; t < 300; ++t) {
    Frame f(64, 64, t);
    f.y.fill(0.5);
    const double s = 0.004 * std::sin(2 * std::numbers::pi * 2.0 * t / 30.0);
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x) {
        const double r2 = (x - 32.0) * (x - 32.0) + (y - 32.0) * (y - 32.0);
        f.y(x, y) += s * std::exp(-r2 / 18.0);
      }
    seq.frames.push_back(std::move(f));
  }
  MagnificationConfig cfg;
  cfg.mode = Mode::kTemporal;
  cfg.alpha = 20.0;
  cfg.band_lo = 1.0;
  cfg.band_hi = 3.0;
  const VideoSequence offline = magnify_temporal(seq, cfg);
  StreamMagnifier magnifier(cfg, 30.0, 64, 64);
  VideoSequence streamed;
  streamed.fps = 30;
  for (const Frame& f : seq.frames) streamed.frames.push_back(magnifier.step(f));

  auto tail_amp = [](const VideoSequence& v) {
    std::vector<double> s;
    for (std::size_t t = 60; t < v.frame_count(); ++t) s.push_back(v.frames[t].y(32, 32));
    return ts_test::tone_amplitude(s, 30.0, 2.0);
  };
  const double base = tail_amp(seq);
  const double band_gain_offline = tail_amp(offline) / base - 1.0;
  const double band_gain_stream = tail_amp(streamed) / base - 1.0;
  const double db = 20.0 * std::log10(band_gain_stream / band_gain_offline);
  EXPECT_LE(std::abs(db), 3.0);
  note("streaming band gain vs offline " + std::to_string(db) + " dB (2 s transient skipped)");
}

// 5. Mode comparison on the rotating disc. Direction asserted, magnitudes
// recorded.
TEST_F(Acceptance, RotationModeComparison) {
  criterion(5, "rotation clip: artefact energy dynamic < static and dynamic < temporal");
  MotionSpec spec;
  spec.kind = MotionKind::kRotate;
  spec.angle_rate_deg = 0.5;
  spec.duration_s = 5.0;
  spec.fps = 30.0;
  spec.overscan_px = 24;
  const SynthClip clip = render_clip(make_disc_texture(144, 144, 24.0), spec);

  auto run_mode = [&](Mode mode, double alpha) {
    MagnificationConfig cfg;
    cfg.mode = mode;
    cfg.alpha = alpha;
    if (mode == Mode::kTemporal) {
      cfg.band_lo = 1.0;
      cfg.band_hi = 3.0;
    }
    return magnify(clip.seq, cfg);
  };
  const Rect corner{2, 2, 12, 12};
  const double e_dynamic = artefact_energy(clip.seq, run_mode(Mode::kDynamic, 10.0), corner);
  const double e_static = artefact_energy(clip.seq, run_mode(Mode::kStatic, 10.0), corner);
  const double e_temporal = artefact_energy(clip.seq, run_mode(Mode::kTemporal, 20.0), corner);

  char buf[160];
  std::snprintf(buf, sizeof buf, "artefact energy: dynamic %.3e, static %.3e, temporal %.3e",
                e_dynamic, e_static, e_temporal);
  note(buf);
  EXPECT_LT(e_dynamic, e_static);
  EXPECT_LT(e_dynamic, e_temporal);
}

// 6. Detector corpus: 10 tremor + 10 breathing clips, default config.
TEST_F(Acceptance, DetectorCorpus) {
  criterion(6, "detector corpus: precision = recall = 1.0, boundaries within 1 window");
  const auto t0 = Clock::now();
  const DetectorConfig cfg;
  const double window_s = cfg.window_s;

  int true_pos = 0, false_pos = 0, false_neg = 0;
  double worst_boundary = 0;
  for (int i = 0; i < 20; ++i) {
    const bool tremor = i < 10;
    const CorpusClip c = corpus_clip(i, tremor);
    const auto episodes = detect_tremor(c.clip.seq, cfg).episodes;
    if (!tremor) {
      if (!episodes.empty()) ++false_pos;
      EXPECT_TRUE(episodes.empty()) << "breathing clip " << i << " false positive";
      continue;
    }
    if (episodes.empty()) {
      ++false_neg;
      ADD_FAILURE() << "tremor clip " << i << " missed";
      continue;
    }
    ++true_pos;
    EXPECT_EQ(episodes.size(), 1u) << "tremor clip " << i;
    const double start_err = std::abs(episodes.front().start_s - c.truth_start);
    const double end_err = std::abs(episodes.back().end_s - c.truth_end);
    worst_boundary = std::max({worst_boundary, start_err, end_err});
    EXPECT_LE(start_err, window_s) << "clip " << i;
    EXPECT_LE(end_err, window_s) << "clip " << i;

    if (i == 3) {
      // the emitted report for corpus clip #3 carries the ground-truth
      // episode, and survives an emit/parse round trip
      RunConfig rc;
      const TremorReport report = make_report("corpus-clip-3", c.clip.seq.duration_s(),
                                              rc.echo(), episodes);
      const TremorReport back = parse_report(emit_report(report));
      EXPECT_TRUE(back == report);
      ASSERT_EQ(back.episodes.size(), 1u);
      EXPECT_LE(std::abs(back.episodes[0].start_s - c.truth_start), window_s);
      EXPECT_LE(std::abs(back.episodes[0].end_s - c.truth_end), window_s);
    }
  }
  const double precision = true_pos + false_pos > 0
                               ? static_cast<double>(true_pos) / (true_pos + false_pos)
                               : 0.0;
  const double recall =
      true_pos + false_neg > 0 ? static_cast<double>(true_pos) / (true_pos + false_neg) : 0.0;
  EXPECT_EQ(precision, 1.0);
  EXPECT_EQ(recall, 1.0);
  note("precision " + std::to_string(precision) + ", recall " + std::to_string(recall) +
       ", worst boundary error " + std::to_string(worst_boundary) + " s");
  const double dt = seconds_since(t0);
  note("runtime " + std::to_string(dt) + " s (budget 180 s)");
  EXPECT_LT(dt, 180.0);
}

// 7. End-to-end pipeline gain: magnify-then-detect beats detect alone by 10x.
TEST_F(Acceptance, PipelineGain) {
  criterion(7, "tremor-band energy on magnified sub-pixel clips >= 10x raw");
  MagnificationConfig mag;
  mag.mode = Mode::kDynamic;
  mag.alpha = 10.0;
  const DetectorConfig det;

  for (int i = 0; i < 3; ++i) {
    MotionSpec spec;
    spec.kind = MotionKind::kTranslateSin;
    spec.amplitude_px = 0.12;
    spec.frequency_hz = 5.5 + i;
    spec.duration_s = 8.0;
    spec.fps = 30.0;
    spec.seed = 8800 + i;
    const SynthClip clip = render_clip(make_noise_texture(96, 96, spec.seed, 4.0), spec);

    auto band_energy = [&](const VideoSequence& seq) {
      double e = 0;
      for (const auto& w : detect_tremor(seq, det).window_scores) e += w.tremor_energy;
      return e;
    };
    const double raw = band_energy(clip.seq);
    const double magnified = band_energy(magnify(clip.seq, mag));
    ASSERT_GT(raw, 0.0);
    const double ratio = magnified / raw;
    EXPECT_GE(ratio, 10.0) << "clip " << i;
    note("clip " + std::to_string(i) + ": energy ratio " + std::to_string(ratio) + "x");
  }
}

// 8. Throughput at the deployment operating point, via the shipped CLI.
TEST_F(Acceptance, ThroughputTarget) {
  criterion(8, "bench 640x480 depth-4 dynamic >= 45 fps");
  const std::filesystem::path out =
      std::filesystem::path(::testing::TempDir()) / "bench_out.txt";
  const std::string cmd = std::string(TREMORSCOPE_BIN) +
                          " bench --res 640x480 --mode dynamic --depth 4 --seconds 3 > " +
                          out.string() + " 2>/dev/null";
  ASSERT_EQ(WEXITSTATUS(std::system(cmd.c_str())), 0);
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  std::smatch m;
  const std::string text = ss.str();
  ASSERT_TRUE(std::regex_search(text, m, std::regex("fps=([0-9.]+)"))) << text;
  const double fps = std::stod(m[1]);
  note("measured " + std::to_string(fps) + " fps on " +
       std::to_string(std::thread::hardware_concurrency()) +
       " hardware threads (target machine: 8-core desktop)");
  EXPECT_GE(fps, 45.0);
}

// 9. Bit-exact determinism of frames and reports.
TEST_F(Acceptance, Determinism) {
  criterion(9, "identical config and seed give bit-identical frames and reports");
  MotionSpec spec;
  spec.kind = MotionKind::kTranslateSin;
  spec.amplitude_px = 0.6;
  spec.frequency_hz = 6.0;
  spec.duration_s = 8.0;
  spec.noise_sigma = 0.004;
  spec.seed = 99;
  const SynthClip a = render_clip(make_bar_texture(80, 80), spec);
  const SynthClip b = render_clip(make_bar_texture(80, 80), spec);

  MagnificationConfig cfg;
  cfg.mode = Mode::kDynamic;
  cfg.alpha = 10.0;
  const VideoSequence ma = magnify(a.seq, cfg);
  const VideoSequence mb = magnify(b.seq, cfg);
  ASSERT_EQ(ma.frame_count(), mb.frame_count());
  for (std::size_t t = 0; t < ma.frame_count(); ++t) {
    ASSERT_EQ(std::memcmp(ma.frames[t].y.data(), mb.frames[t].y.data(),
                          ma.frames[t].y.size() * sizeof(double)),
              0);
    ASSERT_EQ(std::memcmp(ma.frames[t].cb.data(), mb.frames[t].cb.data(),
                          ma.frames[t].cb.size() * sizeof(double)),
              0);
  }

  const DetectorConfig det;
  RunConfig rc;
  const std::string report_a = emit_report(
      make_report("clip", a.seq.duration_s(), rc.echo(), detect_tremor(ma, det).episodes));
  const std::string report_b = emit_report(
      make_report("clip", b.seq.duration_s(), rc.echo(), detect_tremor(mb, det).episodes));
  EXPECT_EQ(report_a, report_b);
  note("frames and reports bit-identical across runs");
}
