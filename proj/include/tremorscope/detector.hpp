#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "tremorscope/fft.hpp"
#include "tremorscope/types.hpp"

// Tremor detection: rectified frame-difference motion signals per region,
// Welch-style windowed spectra, and band-energy-ratio scoring. The score is a
// ratio, so it is invariant to signal gain (and hence to the magnification
// factor and lighting).

namespace tremorscope {

/// Mean absolute luma frame-difference over one region, one sample per frame
/// transition (length = frames - 1).
struct MotionSignal {
  int region_id = 0;
  std::vector<double> samples;
  double fps = 30.0;
};

/// Frequency bands in Hz. Defaults follow clinical tremor literature and
/// infant respiration rates; every edge is a config key.
struct BandSpec {
  double tremor_lo = 4.0;
  double tremor_hi = 10.0;
  double breathing_lo = 0.3;
  double breathing_hi = 1.5;
  double movement_lo = 0.0;  // exclusive
  double movement_hi = 3.0;

  void validate(double fps) const {
    auto band_ok = [](double lo, double hi) { return lo >= 0 && lo < hi; };
    if (!band_ok(tremor_lo, tremor_hi) || !band_ok(breathing_lo, breathing_hi) ||
        !band_ok(movement_lo, movement_hi))
      throw ConfigError("band edges must satisfy lo < hi");
    if (tremor_hi >= fps / 2)
      throw ConfigError("tremor band upper edge must stay below Nyquist (fps/2)");
    // the score ratio needs disjoint attribution; the tremor band must not
    // collide with the low-frequency bands
    if (tremor_lo <= movement_hi || tremor_lo <= breathing_hi)
      throw ConfigError("tremor band overlaps movement/breathing bands");
  }
};

struct WindowSpectrum {
  double start_s = 0;
  double window_s = 0;
  double bin_hz = 0;                // frequency resolution fps/N
  std::vector<double> power;       // one-sided, bins 0..N/2
};

struct WindowScore {
  double start_s = 0;
  double end_s = 0;
  double tremor_energy = 0;
  double movement_energy = 0;
  double breathing_energy = 0;
  double score = 0;          // tremor / (tremor + movement + breathing)
  double prominence_db = 0;  // peak tremor bin over the window's median bin
  bool flagged = false;
};

struct TremorEpisode {
  double start_s = 0;
  double end_s = 0;
  double tremor_energy = 0;
  double total_energy = 0;
  double score = 0;
  bool flagged = true;
};

struct DetectorConfig {
  BandSpec bands;
  double threshold = 0.5;
  double window_s = 4.0;
  double overlap = 0.5;
  double min_duration_s = 2.0;
  // Tremor is repetitive, hence narrowband: a window only flags when its
  // strongest tremor-band bin stands this far above the window's median bin.
  // A flat noise-only spectrum stays below 20 dB and never flags.
  double prominence_db = 20.0;
};

inline std::vector<MotionSignal> extract_motion_signal(const VideoSequence& seq,
                                                       std::span<const Rect> regions = {}) {
  if (seq.frame_count() < 2)
    throw ProcessingError("need at least two frames to extract a motion signal");
  std::vector<Rect> all;
  if (regions.empty()) {
    all.push_back(Rect{0, 0, seq.width(), seq.height()});
  } else {
    all.assign(regions.begin(), regions.end());
    for (const Rect& r : all)
      if (!r.inside(seq.width(), seq.height()))
        throw ConfigError("region " + std::to_string(r.x) + "," + std::to_string(r.y) + "," +
                          std::to_string(r.w) + "," + std::to_string(r.h) +
                          " empty or outside frame bounds");
  }

  const int T = static_cast<int>(seq.frame_count());
  std::vector<MotionSignal> signals(all.size());
  for (std::size_t r = 0; r < all.size(); ++r) {
    signals[r].region_id = static_cast<int>(r);
    signals[r].fps = seq.fps;
    signals[r].samples.resize(T - 1);
  }
  for (int t = 1; t < T; ++t) {
    const Plane& cur = seq.frames[t].y;
    const Plane& prev = seq.frames[t - 1].y;
    for (std::size_t r = 0; r < all.size(); ++r) {
      const Rect& rc = all[r];
      double acc = 0;
      for (int y = rc.y; y < rc.y + rc.h; ++y) {
        const double* c = cur.row(y);
        const double* p = prev.row(y);
        for (int x = rc.x; x < rc.x + rc.w; ++x) acc += std::abs(c[x] - p[x]);
      }
      signals[r].samples[t - 1] = acc / static_cast<double>(rc.area());
    }
  }
  return signals;
}

/// Hann-windowed, mean-removed overlapping periodograms.
/// Power is normalized so an in-bin sinusoid of amplitude A peaks near A^2/2.
inline std::vector<WindowSpectrum> power_spectrum(const MotionSignal& signal, double window_s,
                                                  double overlap) {
  if (overlap < 0 || overlap >= 1) throw ConfigError("overlap must lie in [0,1)");
  const int n = static_cast<int>(std::lround(window_s * signal.fps));
  if (n < 32) throw ConfigError("window too short: window_s*fps must be >= 32 samples");
  const int len = static_cast<int>(signal.samples.size());
  if (len < n) throw ProcessingError("window longer than signal");

  const int hop = std::max(1, static_cast<int>(std::lround(n * (1.0 - overlap))));
  std::vector<double> win(n);
  double wsum = 0;
  for (int i = 0; i < n; ++i) {
    win[i] = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * i / (n - 1));
    wsum += win[i];
  }
  const double norm = 2.0 / (wsum * wsum);

  std::vector<WindowSpectrum> spectra;
  std::vector<double> seg(n);
  std::vector<std::complex<double>> bins(n / 2 + 1);
  for (int start = 0; start + n <= len; start += hop) {
    double mean = 0;
    for (int i = 0; i < n; ++i) mean += signal.samples[start + i];
    mean /= n;
    for (int i = 0; i < n; ++i) seg[i] = (signal.samples[start + i] - mean) * win[i];
    fft::forward_r2c(seg, bins);

    WindowSpectrum ws;
    // sample k of the motion signal spans frames k..k+1; window covers
    // [start, start+n] transitions => [start/fps, (start+n)/fps] seconds
    ws.start_s = start / signal.fps;
    ws.window_s = n / signal.fps;
    ws.bin_hz = signal.fps / n;
    ws.power.resize(n / 2 + 1);
    for (int k = 0; k <= n / 2; ++k) {
      const double doubling = (k == 0 || 2 * k == n) ? 0.5 : 1.0;
      ws.power[k] = doubling * norm * std::norm(bins[k]);
    }
    spectra.push_back(std::move(ws));
  }
  return spectra;
}

/// Mean of several window spectra (same geometry required).
inline std::vector<double> average_spectra(std::span<const WindowSpectrum> spectra) {
  if (spectra.empty()) return {};
  std::vector<double> avg(spectra.front().power.size(), 0.0);
  for (const auto& s : spectra) {
    if (s.power.size() != avg.size()) throw ProcessingError("spectra sizes disagree");
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += s.power[i];
  }
  for (double& v : avg) v /= static_cast<double>(spectra.size());
  return avg;
}

namespace det_detail {

enum class BinBand { kNone, kBreathing, kMovement, kTremor };

// Disjoint attribution: each bin lands in at most one band of the score
// ratio. Rectified frame differences double the frequency of a symmetric
// oscillation, so tremor also claims the 2x harmonic band.
inline BinBand classify_bin(double f, const BandSpec& b) {
  if (f >= b.breathing_lo && f <= b.breathing_hi) return BinBand::kBreathing;
  if (f > b.movement_lo && f <= b.movement_hi) return BinBand::kMovement;
  if ((f >= b.tremor_lo && f <= b.tremor_hi) ||
      (f >= 2 * b.tremor_lo && f <= 2 * b.tremor_hi))
    return BinBand::kTremor;
  return BinBand::kNone;
}

/// Append an episode, merging it into the previous one when they overlap.
inline void merge_episode(std::vector<TremorEpisode>& episodes, const TremorEpisode& ep) {
  if (!episodes.empty() && ep.start_s < episodes.back().end_s) {
    auto& prev = episodes.back();
    prev.end_s = std::max(prev.end_s, ep.end_s);
    prev.tremor_energy += ep.tremor_energy;
    prev.total_energy += ep.total_energy;
    prev.score = prev.total_energy > 0 ? prev.tremor_energy / prev.total_energy : 0.0;
  } else {
    episodes.push_back(ep);
  }
}

}  // namespace det_detail

inline std::vector<WindowScore> score_spectra(std::span<const WindowSpectrum> spectra,
                                              const BandSpec& bands, double threshold,
                                              double prominence_db = 20.0) {
  std::vector<WindowScore> scores;
  scores.reserve(spectra.size());
  std::vector<double> sorted;
  for (const auto& ws : spectra) {
    WindowScore sc;
    sc.start_s = ws.start_s;
    sc.end_s = ws.start_s + ws.window_s;
    double peak = 0;
    for (std::size_t k = 1; k < ws.power.size(); ++k) {
      const double f = static_cast<double>(k) * ws.bin_hz;
      switch (det_detail::classify_bin(f, bands)) {
        case det_detail::BinBand::kBreathing: sc.breathing_energy += ws.power[k]; break;
        case det_detail::BinBand::kMovement: sc.movement_energy += ws.power[k]; break;
        case det_detail::BinBand::kTremor:
          sc.tremor_energy += ws.power[k];
          peak = std::max(peak, ws.power[k]);
          break;
        case det_detail::BinBand::kNone: break;
      }
    }
    const double total = sc.tremor_energy + sc.movement_energy + sc.breathing_energy;
    sc.score = total > 0 ? sc.tremor_energy / total : 0.0;

    sorted.assign(ws.power.begin() + 1, ws.power.end());
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted.empty() ? 0.0 : sorted[sorted.size() / 2];
    sc.prominence_db =
        peak > 0 ? (median > 0 ? 10.0 * std::log10(peak / median) : 1e3) : 0.0;
    sc.flagged = sc.score > threshold && sc.prominence_db >= prominence_db && peak > 0;
    scores.push_back(sc);
  }
  return scores;
}

/// Flag windows whose tremor-band share exceeds the threshold, merge adjacent
/// flagged windows into episodes, and drop episodes shorter than min_duration
/// (tremor is sustained by definition; brief spikes are not "constant").
inline std::vector<TremorEpisode> score_windows(std::span<const WindowSpectrum> spectra,
                                                const BandSpec& bands, double threshold,
                                                double min_duration_s = 2.0,
                                                double prominence_db = 20.0) {
  const std::vector<WindowScore> scores = score_spectra(spectra, bands, threshold, prominence_db);
  std::vector<TremorEpisode> episodes;
  std::size_t i = 0;
  while (i < scores.size()) {
    if (!scores[i].flagged) {
      ++i;
      continue;
    }
    std::size_t j = i;
    TremorEpisode ep;
    ep.start_s = scores[i].start_s;
    double movement = 0, breathing = 0;
    while (j < scores.size() && scores[j].flagged) {
      ep.end_s = scores[j].end_s;
      ep.tremor_energy += scores[j].tremor_energy;
      movement += scores[j].movement_energy;
      breathing += scores[j].breathing_energy;
      ++j;
    }
    ep.total_energy = ep.tremor_energy + movement + breathing;
    ep.score = ep.total_energy > 0 ? ep.tremor_energy / ep.total_energy : 0.0;
    episodes.push_back(ep);
    i = j;
  }

  // overlapping windows can make neighbouring runs overlap; keep episodes
  // sorted and non-overlapping
  std::vector<TremorEpisode> merged;
  for (const auto& ep : episodes) det_detail::merge_episode(merged, ep);
  std::erase_if(merged,
                [&](const TremorEpisode& ep) { return ep.end_s - ep.start_s < min_duration_s; });
  return merged;
}

struct DetectionResult {
  std::vector<TremorEpisode> episodes;
  std::vector<WindowScore> window_scores;

  double max_score() const {
    double m = 0;
    for (const auto& w : window_scores) m = std::max(m, w.score);
    return m;
  }
};

/// Causal scorer for live monitoring: keeps a ring buffer of window_s*fps
/// motion samples per region and emits a WindowScore every hop. The window
/// grid matches the offline path, so scores are identical for the same
/// signal.
class StreamingScorer {
 public:
  StreamingScorer(const DetectorConfig& cfg, double fps, std::size_t regions = 1)
      : cfg_(cfg), fps_(fps) {
    cfg.bands.validate(fps);
    window_samples_ = static_cast<int>(std::lround(cfg.window_s * fps));
    if (window_samples_ < 32)
      throw ConfigError("window too short: window_s*fps must be >= 32 samples");
    hop_ = std::max(1, static_cast<int>(std::lround(window_samples_ * (1.0 - cfg.overlap))));
    rings_.resize(regions);
  }

  int window_samples() const { return window_samples_; }

  /// Feed one motion sample per region (frame t vs t-1); returns the scores
  /// of any windows completed by this sample.
  std::vector<WindowScore> push(std::span<const double> samples) {
    if (samples.size() != rings_.size())
      throw ProcessingError("sample count does not match region count");
    std::vector<WindowScore> out;
    for (std::size_t r = 0; r < rings_.size(); ++r) {
      Ring& ring = rings_[r];
      ring.data.push_back(samples[r]);
      if (static_cast<int>(ring.data.size()) > window_samples_) ring.data.pop_front();
      ++ring.total;
      if (static_cast<int>(ring.data.size()) == window_samples_ &&
          (ring.total - window_samples_) % hop_ == 0) {
        MotionSignal sig;
        sig.fps = fps_;
        sig.samples.assign(ring.data.begin(), ring.data.end());
        auto spectra = power_spectrum(sig, cfg_.window_s, cfg_.overlap);
        auto scores =
            score_spectra(spectra, cfg_.bands, cfg_.threshold, cfg_.prominence_db);
        // one full window in the buffer -> exactly one score; re-anchor its
        // time to the stream position
        WindowScore sc = scores.front();
        sc.start_s = (ring.total - window_samples_) / fps_;
        sc.end_s = sc.start_s + window_samples_ / fps_;
        out.push_back(sc);
      }
    }
    return out;
  }

 private:
  struct Ring {
    std::deque<double> data;
    long total = 0;
  };
  DetectorConfig cfg_;
  double fps_;
  int window_samples_ = 0;
  int hop_ = 1;
  std::vector<Ring> rings_;
};

/// Full single-region pipeline: motion signal -> spectra -> episodes.
inline DetectionResult detect_tremor(const VideoSequence& seq, const DetectorConfig& cfg,
                                     std::span<const Rect> regions = {}) {
  cfg.bands.validate(seq.fps);
  const std::vector<MotionSignal> signals = extract_motion_signal(seq, regions);
  DetectionResult result;
  std::vector<std::vector<TremorEpisode>> per_region;
  for (const MotionSignal& sig : signals) {
    const auto spectra = power_spectrum(sig, cfg.window_s, cfg.overlap);
    auto scores = score_spectra(spectra, cfg.bands, cfg.threshold, cfg.prominence_db);
    per_region.push_back(score_windows(spectra, cfg.bands, cfg.threshold, cfg.min_duration_s,
                                       cfg.prominence_db));
    result.window_scores.insert(result.window_scores.end(), scores.begin(), scores.end());
  }
  // union of episode intervals across regions
  std::vector<TremorEpisode> all;
  for (auto& v : per_region) all.insert(all.end(), v.begin(), v.end());
  std::sort(all.begin(), all.end(),
            [](const TremorEpisode& a, const TremorEpisode& b) { return a.start_s < b.start_s; });
  for (const auto& ep : all) det_detail::merge_episode(result.episodes, ep);
  return result;
}

}  // namespace tremorscope
