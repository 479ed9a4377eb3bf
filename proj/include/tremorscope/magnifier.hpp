#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "tremorscope/parallel.hpp"
#include "tremorscope/pyramid.hpp"
#include "tremorscope/temporal_filter.hpp"
#include "tremorscope/types.hpp"

// Motion magnification in three modes. Static and dynamic modes amplify the
// band-pass difference between the current frame and a reference frame (the
// first frame, or the previous input frame); temporal mode replaces the
// difference with a per-pixel temporal bandpass over each pyramid level.

namespace tremorscope {

enum class Mode { kStatic, kDynamic, kTemporal };

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::kStatic: return "static";
    case Mode::kDynamic: return "dynamic";
    case Mode::kTemporal: return "temporal";
  }
  return "?";
}

inline Mode mode_from_string(const std::string& s) {
  if (s == "static") return Mode::kStatic;
  if (s == "dynamic") return Mode::kDynamic;
  if (s == "temporal") return Mode::kTemporal;
  throw ConfigError("unknown mode '" + s + "' (expected static|dynamic|temporal)");
}

struct MagnificationConfig {
  Mode mode = Mode::kDynamic;
  double alpha = 10.0;        // amplification factor
  double band_lo = 0.0;       // Hz, temporal mode only
  double band_hi = 0.0;
  int depth = 0;              // pyramid levels; 0 = auto from frame size
  double chroma_gain = 0.0;   // fraction of alpha applied to chroma planes
  std::vector<double> level_taper;  // per-level alpha multipliers; empty = default

  static double default_alpha(Mode m) { return m == Mode::kTemporal ? 20.0 : 10.0; }

  int depth_for(int width, int height) const {
    if (depth == 0) return default_pyramid_depth(width, height);
    if (depth < 1 || std::min(width, height) / (1 << (depth - 1)) < 4)
      throw ConfigError("pyramid depth " + std::to_string(depth) + " invalid for " +
                        std::to_string(width) + "x" + std::to_string(height));
    return depth;
  }

  // Default taper halves alpha on the noise-dominated finest level; the
  // residual never gets amplified regardless of taper.
  std::vector<double> taper_for(int d) const {
    std::vector<double> t(level_taper);
    if (t.empty()) {
      t.assign(d, 1.0);
      t[0] = 0.5;
    }
    t.resize(d, t.empty() ? 1.0 : t.back());
    return t;
  }

  void validate(double fps) const {
    if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
    if (chroma_gain < 0.0 || chroma_gain > 1.0)
      throw ConfigError("chroma_gain must lie in [0,1]");
    for (double t : level_taper)
      if (!(t >= 0.0)) throw ConfigError("level taper entries must be >= 0");
    if (mode == Mode::kTemporal) {
      if (!(band_lo > 0.0) || !(band_lo < band_hi))
        throw ConfigError("temporal mode requires a band with 0 < f_lo < f_hi");
      if (!(band_hi < fps / 2.0))
        throw ConfigError("band edge " + std::to_string(band_hi) + " Hz outside Nyquist for fps " +
                          std::to_string(fps));
    }
  }
};

/// Amplify the difference between two congruent pyramids:
/// out_k = cur_k + taper_k * alpha * (cur_k - ref_k); residual passes through.
inline Pyramid manipulate(const Pyramid& ref, const Pyramid& cur, double alpha,
                          std::span<const double> taper) {
  if (!ref.congruent(cur)) throw ProcessingError("pyramid shape mismatch in manipulate");
  Pyramid out = cur;
  for (int k = 0; k < out.depth(); ++k) {
    const double gain = alpha * (k < static_cast<int>(taper.size()) ? taper[k] : 1.0);
    if (gain == 0.0) continue;
    double* o = out.levels[k].data();
    const double* r = ref.levels[k].data();
    for (std::size_t i = 0; i < out.levels[k].size(); ++i) o[i] += gain * (o[i] - r[i]);
  }
  return out;
}

namespace mag_detail {

inline Plane clamp_luma(Plane p) {
  double* d = p.data();
  for (std::size_t i = 0; i < p.size(); ++i) d[i] = std::clamp(d[i], 0.0, 1.0);
  return p;
}

inline Plane clamp_chroma(Plane p) {
  double* d = p.data();
  for (std::size_t i = 0; i < p.size(); ++i) d[i] = std::clamp(d[i], -0.5, 0.5);
  return p;
}

inline Plane amplify_pair(const Pyramid& ref, const Plane& cur, double alpha,
                          std::span<const double> taper, int depth) {
  return collapse(manipulate(ref, build_laplacian(cur, depth), alpha, taper));
}

// Bandpass every pixel's time series across a stack of same-level planes and
// add the amplified band back in place.
inline void amplify_level_stack(std::vector<Pyramid>& pyrs, int level, double gain, double fps,
                                double f_lo, double f_hi) {
  const int T = static_cast<int>(pyrs.size());
  Plane& first = level < pyrs[0].depth() ? pyrs[0].levels[level] : pyrs[0].residual;
  const int w = first.width(), h = first.height();
  auto plane_of = [level](Pyramid& p) -> Plane& {
    return level < p.depth() ? p.levels[level] : p.residual;
  };
  parallel_for(0, h, [&](int y) {
    std::vector<double> series(T);
    for (int x = 0; x < w; ++x) {
      for (int t = 0; t < T; ++t) series[t] = plane_of(pyrs[t])(x, y);
      const std::vector<double> band = ideal_bandpass(series, fps, f_lo, f_hi);
      for (int t = 0; t < T; ++t) plane_of(pyrs[t])(x, y) = series[t] + gain * band[t];
    }
  });
}

}  // namespace mag_detail

/// Static mode: every frame is amplified against the first frame.
inline VideoSequence magnify_static(const VideoSequence& seq, const MagnificationConfig& cfg) {
  if (seq.empty()) throw ProcessingError("cannot magnify an empty sequence");
  cfg.validate(seq.fps);
  const int depth = cfg.depth_for(seq.width(), seq.height());
  const std::vector<double> taper = cfg.taper_for(depth);
  const int T = static_cast<int>(seq.frame_count());

  VideoSequence out;
  out.fps = seq.fps;
  out.frames.resize(T);
  out.frames[0] = seq.frames[0];

  const Pyramid ref_y = build_laplacian(seq.frames[0].y, depth);
  Pyramid ref_cb, ref_cr;
  if (cfg.chroma_gain > 0.0) {
    ref_cb = build_laplacian(seq.frames[0].cb, depth);
    ref_cr = build_laplacian(seq.frames[0].cr, depth);
  }

  parallel_for(1, T, [&](int t) {
    const Frame& in = seq.frames[t];
    Frame f;
    f.index = in.index;
    f.y = mag_detail::clamp_luma(mag_detail::amplify_pair(ref_y, in.y, cfg.alpha, taper, depth));
    if (cfg.chroma_gain > 0.0) {
      const double ca = cfg.alpha * cfg.chroma_gain;
      f.cb = mag_detail::clamp_chroma(mag_detail::amplify_pair(ref_cb, in.cb, ca, taper, depth));
      f.cr = mag_detail::clamp_chroma(mag_detail::amplify_pair(ref_cr, in.cr, ca, taper, depth));
    } else {
      f.cb = in.cb;
      f.cr = in.cr;
    }
    out.frames[t] = std::move(f);
  });
  return out;
}

/// Dynamic mode: every frame is amplified against the previous *input* frame,
/// so amplified noise never feeds back into later references.
inline VideoSequence magnify_dynamic(const VideoSequence& seq, const MagnificationConfig& cfg) {
  if (seq.empty()) throw ProcessingError("cannot magnify an empty sequence");
  cfg.validate(seq.fps);
  const int depth = cfg.depth_for(seq.width(), seq.height());
  const std::vector<double> taper = cfg.taper_for(depth);
  const int T = static_cast<int>(seq.frame_count());

  std::vector<Pyramid> pyr_y(T);
  parallel_for(0, T, [&](int t) { pyr_y[t] = build_laplacian(seq.frames[t].y, depth); });
  std::vector<Pyramid> pyr_cb, pyr_cr;
  if (cfg.chroma_gain > 0.0) {
    pyr_cb.resize(T);
    pyr_cr.resize(T);
    parallel_for(0, T, [&](int t) {
      pyr_cb[t] = build_laplacian(seq.frames[t].cb, depth);
      pyr_cr[t] = build_laplacian(seq.frames[t].cr, depth);
    });
  }

  VideoSequence out;
  out.fps = seq.fps;
  out.frames.resize(T);
  out.frames[0] = seq.frames[0];
  parallel_for(1, T, [&](int t) {
    const Frame& in = seq.frames[t];
    Frame f;
    f.index = in.index;
    f.y = mag_detail::clamp_luma(collapse(manipulate(pyr_y[t - 1], pyr_y[t], cfg.alpha, taper)));
    if (cfg.chroma_gain > 0.0) {
      const double ca = cfg.alpha * cfg.chroma_gain;
      f.cb = mag_detail::clamp_chroma(collapse(manipulate(pyr_cb[t - 1], pyr_cb[t], ca, taper)));
      f.cr = mag_detail::clamp_chroma(collapse(manipulate(pyr_cr[t - 1], pyr_cr[t], ca, taper)));
    } else {
      f.cb = in.cb;
      f.cr = in.cr;
    }
    out.frames[t] = std::move(f);
  });
  return out;
}

/// Temporal mode: per-pixel, per-level offline ideal bandpass; the band signal
/// is amplified and added back before reconstruction.
inline VideoSequence magnify_temporal(const VideoSequence& seq, const MagnificationConfig& cfg) {
  if (seq.empty()) throw ProcessingError("cannot magnify an empty sequence");
  cfg.validate(seq.fps);
  const int T = static_cast<int>(seq.frame_count());
  if (T < 8) throw ProcessingError("sequence too short for the temporal filter (need >= 8 frames)");
  const int depth = cfg.depth_for(seq.width(), seq.height());
  const std::vector<double> taper = cfg.taper_for(depth);

  auto run_channel = [&](auto plane_of, double alpha) {
    std::vector<Pyramid> pyrs(T);
    parallel_for(0, T, [&](int t) { pyrs[t] = build_laplacian(plane_of(seq.frames[t]), depth); });
    for (int k = 0; k < depth; ++k) {
      const double gain = alpha * taper[k];
      if (gain == 0.0) continue;
      mag_detail::amplify_level_stack(pyrs, k, gain, seq.fps, cfg.band_lo, cfg.band_hi);
    }
    std::vector<Plane> planes(T);
    parallel_for(0, T, [&](int t) { planes[t] = collapse(pyrs[t]); });
    return planes;
  };

  std::vector<Plane> ys = run_channel([](const Frame& f) -> const Plane& { return f.y; }, cfg.alpha);
  std::vector<Plane> cbs, crs;
  if (cfg.chroma_gain > 0.0) {
    const double ca = cfg.alpha * cfg.chroma_gain;
    cbs = run_channel([](const Frame& f) -> const Plane& { return f.cb; }, ca);
    crs = run_channel([](const Frame& f) -> const Plane& { return f.cr; }, ca);
  }

  VideoSequence out;
  out.fps = seq.fps;
  out.frames.resize(T);
  parallel_for(0, T, [&](int t) {
    Frame f;
    f.index = seq.frames[t].index;
    f.y = mag_detail::clamp_luma(std::move(ys[t]));
    if (cfg.chroma_gain > 0.0) {
      f.cb = mag_detail::clamp_chroma(std::move(cbs[t]));
      f.cr = mag_detail::clamp_chroma(std::move(crs[t]));
    } else {
      f.cb = seq.frames[t].cb;
      f.cr = seq.frames[t].cr;
    }
    out.frames[t] = std::move(f);
  });
  return out;
}

inline VideoSequence magnify(const VideoSequence& seq, const MagnificationConfig& cfg) {
  switch (cfg.mode) {
    case Mode::kStatic: return magnify_static(seq, cfg);
    case Mode::kDynamic: return magnify_dynamic(seq, cfg);
    case Mode::kTemporal: return magnify_temporal(seq, cfg);
  }
  throw ConfigError("unknown magnification mode");
}

/// Recursive filter memory for one streaming channel: per pyramid level, the
/// two state pairs of the high-pass/low-pass biquad cascade at every sample.
struct FilterState {
  struct LevelState {
    Plane hp_w1, hp_w2, lp_w1, lp_w2;
  };
  std::vector<LevelState> levels;
  bool primed = false;

  void reset() {
    levels.clear();
    primed = false;
  }
};

/// Causal frame-at-a-time magnifier for all three modes. Temporal mode uses
/// the streaming IIR bandpass; static/dynamic keep one reference pyramid.
class StreamMagnifier {
 public:
  StreamMagnifier(MagnificationConfig cfg, double fps, int width, int height)
      : cfg_(std::move(cfg)), width_(width), height_(height) {
    cfg_.validate(fps);
    depth_ = cfg_.depth_for(width, height);
    taper_ = cfg_.taper_for(depth_);
    if (cfg_.mode == Mode::kTemporal) iir_ = BandpassIir::design(cfg_.band_lo, cfg_.band_hi, fps);
  }

  const MagnificationConfig& config() const { return cfg_; }

  void reset() {
    y_ = ChannelState{};
    cb_ = ChannelState{};
    cr_ = ChannelState{};
  }

  Frame step(const Frame& in) {
    if (in.width() != width_ || in.height() != height_)
      throw ProcessingError("stream frame does not match magnifier dimensions");
    Frame out;
    out.index = in.index;
    out.y = mag_detail::clamp_luma(process(in.y, y_, cfg_.alpha));
    if (cfg_.chroma_gain > 0.0) {
      const double ca = cfg_.alpha * cfg_.chroma_gain;
      out.cb = mag_detail::clamp_chroma(process(in.cb, cb_, ca));
      out.cr = mag_detail::clamp_chroma(process(in.cr, cr_, ca));
    } else {
      out.cb = in.cb;
      out.cr = in.cr;
    }
    return out;
  }

 private:
  struct ChannelState {
    Pyramid ref;
    bool have_ref = false;
    FilterState filter;
  };

  Plane process(const Plane& in, ChannelState& st, double alpha) {
    if (cfg_.mode == Mode::kTemporal) return process_temporal(in, st, alpha);
    Pyramid cur = build_laplacian(in, depth_);
    if (!st.have_ref) {
      st.ref = std::move(cur);
      st.have_ref = true;
      return in;
    }
    Plane result = collapse(manipulate(st.ref, cur, alpha, taper_));
    if (cfg_.mode == Mode::kDynamic) st.ref = std::move(cur);
    return result;
  }

  Plane process_temporal(const Plane& in, ChannelState& st, double alpha) {
    Pyramid pyr = build_laplacian(in, depth_);
    FilterState& fs = st.filter;
    if (!fs.primed) {
      fs.levels.resize(depth_);
      for (int k = 0; k < depth_; ++k) {
        const Plane& lvl = pyr.levels[k];
        auto& ls = fs.levels[k];
        ls.hp_w1 = Plane(lvl.width(), lvl.height());
        ls.hp_w2 = Plane(lvl.width(), lvl.height());
        ls.lp_w1 = Plane(lvl.width(), lvl.height());
        ls.lp_w2 = Plane(lvl.width(), lvl.height());
        for (std::size_t i = 0; i < lvl.size(); ++i) {
          BiquadState b;
          b.prime(iir_.hp, lvl.data()[i]);
          ls.hp_w1.data()[i] = b.w1;
          ls.hp_w2.data()[i] = b.w2;
          // low-pass section sees the high-pass output, which is 0 at DC
        }
      }
      fs.primed = true;
    }
    for (int k = 0; k < depth_; ++k) {
      const double gain = alpha * taper_[k];
      auto& ls = fs.levels[k];
      Plane& lvl = pyr.levels[k];
      if (!lvl.same_size(ls.hp_w1)) throw ProcessingError("filter state / frame mismatch");
      const BiquadCoeffs hp = iir_.hp, lp = iir_.lp;
      auto filter_rows = [&](int row) {
        const std::size_t off = static_cast<std::size_t>(row) * lvl.width();
        double* x = lvl.data() + off;
        double* hw1 = ls.hp_w1.data() + off;
        double* hw2 = ls.hp_w2.data() + off;
        double* lw1 = ls.lp_w1.data() + off;
        double* lw2 = ls.lp_w2.data() + off;
        for (int i = 0; i < lvl.width(); ++i) {
          const double v = x[i];
          const double yh = hp.b0 * v + hw1[i];
          hw1[i] = hp.b1 * v - hp.a1 * yh + hw2[i];
          hw2[i] = hp.b2 * v - hp.a2 * yh;
          const double yb = lp.b0 * yh + lw1[i];
          lw1[i] = lp.b1 * yh - lp.a1 * yb + lw2[i];
          lw2[i] = lp.b2 * yh - lp.a2 * yb;
          x[i] = v + gain * yb;
        }
      };
      // pixels are independent streams; split big planes across workers
      if (lvl.size() >= 16384) {
        parallel_for(0, lvl.height(), filter_rows);
      } else {
        for (int row = 0; row < lvl.height(); ++row) filter_rows(row);
      }
    }
    return collapse(pyr);
  }

  MagnificationConfig cfg_;
  int width_;
  int height_;
  int depth_ = 1;
  std::vector<double> taper_;
  BandpassIir iir_;
  ChannelState y_, cb_, cr_;
};

}  // namespace tremorscope
