// End-to-end tests of the command-line tool: exit-code contract, flag/config
// merging, and the magnify -> detect -> report pipeline on synthetic clips.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tremorscope/report.hpp"
#include "tremorscope/video_io.hpp"

namespace fs = std::filesystem;
using namespace tremorscope;

namespace {

const char* kBin = TREMORSCOPE_BIN;

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
};

RunResult run(const std::string& args) {
  static int counter = 0;
  const fs::path out_file =
      fs::path(::testing::TempDir()) / ("cli_out_" + std::to_string(counter++) + ".txt");
  const std::string cmd =
      std::string(kBin) + " " + args + " > " + out_file.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  r.stdout_text = ss.str();
  return r;
}

fs::path work_dir() {
  static fs::path dir = [] {
    const fs::path p = fs::path(::testing::TempDir()) / "cli_work";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path make_tremor_clip() {
  static fs::path clip = [] {
    const fs::path p = work_dir() / "tremor.y4m";
    const RunResult r = run("synth --out " + p.string() +
                            " --kind translate-sin --amplitude 0.8 --frequency 6"
                            " --duration 12 --noise-sigma 0.003 --seed 5 --label tremor"
                            " --size 64x64 --texture bar");
    EXPECT_EQ(r.exit_code, 0);
    return p;
  }();
  return clip;
}

}  // namespace

TEST(Cli, HelpExitsZero) {
  EXPECT_EQ(run("--help").exit_code, 0);
  EXPECT_EQ(run("magnify --help").exit_code, 0);
}

TEST(Cli, MissingSubcommandIsConfigError) {
  EXPECT_EQ(run("").exit_code, 2);
  EXPECT_EQ(run("frobnicate").exit_code, 2);
}

TEST(Cli, SynthEmitsClipAndTruthSidecar) {
  const fs::path clip = make_tremor_clip();
  EXPECT_TRUE(fs::exists(clip));
  EXPECT_TRUE(fs::exists(clip.string() + ".truth.txt"));
  const VideoSequence seq = load_sequence(clip);
  EXPECT_EQ(seq.frame_count(), 360u);
  EXPECT_EQ(seq.width(), 64);
}

TEST(Cli, MagnifyPreservesGeometryAndFrameCount) {
  const fs::path clip = make_tremor_clip();
  const fs::path out = work_dir() / "magnified.y4m";
  const RunResult r =
      run("magnify --mode dynamic --alpha 10 " + clip.string() + " " + out.string());
  EXPECT_EQ(r.exit_code, 0);
  const VideoSequence a = load_sequence(clip);
  const VideoSequence b = load_sequence(out);
  EXPECT_EQ(a.frame_count(), b.frame_count());
  EXPECT_EQ(a.width(), b.width());
  EXPECT_EQ(a.height(), b.height());
}

TEST(Cli, MagnifyAlphaZeroIsIdentityWithinQuantization) {
  const fs::path clip = make_tremor_clip();
  const fs::path out = work_dir() / "identity.y4m";
  ASSERT_EQ(run("magnify --alpha 0 " + clip.string() + " " + out.string()).exit_code, 0);
  const VideoSequence a = load_sequence(clip);
  const VideoSequence b = load_sequence(out);
  double worst = 0;
  for (std::size_t t = 0; t < a.frame_count(); ++t)
    for (std::size_t i = 0; i < a.frames[t].y.size(); ++i)
      worst = std::max(worst,
                       std::abs(a.frames[t].y.data()[i] - b.frames[t].y.data()[i]));
  EXPECT_LE(worst, 1.0 / 255);
}

TEST(Cli, TemporalModeWithoutBandIsConfigError) {
  const fs::path clip = make_tremor_clip();
  const fs::path out = work_dir() / "t.y4m";
  EXPECT_EQ(run("magnify --mode temporal " + clip.string() + " " + out.string()).exit_code, 2);
}

TEST(Cli, MissingInputIsIoError) {
  EXPECT_EQ(run("magnify --mode dynamic /no/such/clip.y4m " + (work_dir() / "x.y4m").string())
                .exit_code,
            3);
  EXPECT_EQ(run("detect /no/such/clip.y4m").exit_code, 3);
}

TEST(Cli, BadRegionIsConfigError) {
  const fs::path clip = make_tremor_clip();
  EXPECT_EQ(run("detect --region nonsense " + clip.string()).exit_code, 2);
  EXPECT_EQ(run("detect --region 60,60,20,20 " + clip.string()).exit_code, 2);
}

TEST(Cli, DetectFindsTremorEpisode) {
  const fs::path clip = make_tremor_clip();
  const fs::path report_path = work_dir() / "report.json";
  const RunResult r = run("detect --report-out " + report_path.string() + " " + clip.string());
  EXPECT_EQ(r.exit_code, 0);
  const TremorReport report = parse_report(read_file(report_path));
  ASSERT_GE(report.episodes.size(), 1u);
  EXPECT_GT(report.episodes[0].score, 0.5);
  EXPECT_EQ(report.config["mode"], "dynamic");
  EXPECT_NEAR(report.duration_s, 12.0, 1e-6);
}

TEST(Cli, DetectStillClipProducesEmptyReport) {
  const fs::path clip = work_dir() / "still.y4m";
  ASSERT_EQ(run("synth --out " + clip.string() +
                " --amplitude 0 --duration 8 --noise-sigma 0.003 --size 64x64")
                .exit_code,
            0);
  const fs::path report_path = work_dir() / "still_report.json";
  ASSERT_EQ(run("detect --report-out " + report_path.string() + " " + clip.string()).exit_code,
            0);
  const TremorReport report = parse_report(read_file(report_path));
  EXPECT_TRUE(report.episodes.empty());
  EXPECT_EQ(report.flagged_fraction(), 0.0);
}

TEST(Cli, MagnifyFirstPipelineRuns) {
  const fs::path clip = work_dir() / "subpixel.y4m";
  ASSERT_EQ(run("synth --out " + clip.string() +
                " --amplitude 0.3 --frequency 6 --duration 8 --size 64x64 --texture bar")
                .exit_code,
            0);
  const fs::path report_path = work_dir() / "pipeline_report.json";
  const RunResult r = run("detect --magnify-first dynamic,10 --report-out " +
                          report_path.string() + " " + clip.string());
  EXPECT_EQ(r.exit_code, 0);
  const TremorReport report = parse_report(read_file(report_path));
  EXPECT_EQ(report.config["magnify_first"], "dynamic,10");
}

TEST(Cli, ReportSubcommandValidatesAndExportsCsv) {
  const fs::path clip = make_tremor_clip();
  const fs::path report_path = work_dir() / "report2.json";
  ASSERT_EQ(run("detect --report-out " + report_path.string() + " " + clip.string()).exit_code,
            0);
  const fs::path csv = work_dir() / "episodes.csv";
  const RunResult r = run("report " + report_path.string() + " --csv " + csv.string());
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.stdout_text.find("episodes="), std::string::npos);
  EXPECT_NE(read_file(csv).find("start_s,end_s"), std::string::npos);

  // malformed report -> io error
  const fs::path bad = work_dir() / "bad.json";
  std::ofstream(bad) << "{ nope";
  EXPECT_EQ(run("report " + bad.string()).exit_code, 3);
}

TEST(Cli, ConfigFileMergesAndFlagsWin) {
  const fs::path clip = make_tremor_clip();
  const fs::path cfg = work_dir() / "run.cfg";
  std::ofstream(cfg) << "threshold = 0.9\nmode = static\n";
  const fs::path report_path = work_dir() / "merged_report.json";
  // flag --mode overrides the file; threshold comes from the file
  ASSERT_EQ(run("detect --config " + cfg.string() + " --report-out " + report_path.string() +
                " " + clip.string())
                .exit_code,
            0);
  TremorReport report = parse_report(read_file(report_path));
  EXPECT_EQ(report.config["threshold"], 0.9);
  EXPECT_EQ(report.config["mode"], "static");
}

TEST(Cli, StreamFilterMatchesFileMode) {
  const fs::path clip = make_tremor_clip();
  const fs::path streamed = work_dir() / "streamed.y4m";
  const std::string cmd = std::string(kBin) + " magnify --stream --mode dynamic --alpha 10 < " +
                          clip.string() + " > " + streamed.string() + " 2>/dev/null";
  ASSERT_EQ(WEXITSTATUS(std::system(cmd.c_str())), 0);

  const fs::path filed = work_dir() / "filed.y4m";
  ASSERT_EQ(run("magnify --mode dynamic --alpha 10 " + clip.string() + " " + filed.string())
                .exit_code,
            0);
  EXPECT_EQ(read_file(streamed), read_file(filed));
}

TEST(Cli, DeterministicRuns) {
  const fs::path clip = make_tremor_clip();
  const fs::path a = work_dir() / "det_a.y4m";
  const fs::path b = work_dir() / "det_b.y4m";
  ASSERT_EQ(run("magnify --mode dynamic --alpha 10 " + clip.string() + " " + a.string())
                .exit_code,
            0);
  ASSERT_EQ(run("magnify --mode dynamic --alpha 10 " + clip.string() + " " + b.string())
                .exit_code,
            0);
  EXPECT_EQ(read_file(a), read_file(b));
}

TEST(Cli, FrameDirInputWithFpsFlag) {
  // PNG frame-dir in, y4m out; frame dirs carry no timing so --fps is required
  const fs::path dir = work_dir() / "frames_in";
  ASSERT_EQ(run("synth --out " + dir.string() +
                " --amplitude 0.5 --frequency 5 --duration 2 --size 64x64 --texture blob")
                .exit_code,
            0);
  ASSERT_TRUE(fs::exists(dir / "frame_000000.png"));
  const fs::path out = work_dir() / "from_frames.y4m";
  EXPECT_EQ(run("magnify --mode dynamic " + dir.string() + " " + out.string()).exit_code, 2);
  EXPECT_EQ(
      run("magnify --mode dynamic --fps 30 " + dir.string() + " " + out.string()).exit_code,
      0);
  EXPECT_EQ(load_sequence(out).frame_count(), 60u);
}

TEST(Cli, BenchSmokeTest) {
  const RunResult r = run("bench --res 64x64 --seconds 0.5 --mode dynamic");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.stdout_text.find("fps="), std::string::npos);
  EXPECT_EQ(run("bench --res nonsense").exit_code, 2);
}
