#pragma once

#include <algorithm>
#include <array>

#include "tremorscope/types.hpp"

namespace tremorscope {

// BT.601 luma weights. Chroma is stored zero-centred in [-0.5, 0.5] so that
// gray inputs carry exactly zero chroma.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

/// RGB in [0,1] (clamped) -> {Y, Cb, Cr}.
inline std::array<double, 3> rgb_to_luma_chroma(double r, double g, double b) {
  r = std::clamp(r, 0.0, 1.0);
  g = std::clamp(g, 0.0, 1.0);
  b = std::clamp(b, 0.0, 1.0);
  // written so r == g == b gives y == g and exactly zero chroma
  const double y = g + kLumaR * (r - g) + kLumaB * (b - g);
  const double cb = 0.5 * (b - y) / (1.0 - kLumaB);
  const double cr = 0.5 * (r - y) / (1.0 - kLumaR);
  return {y, cb, cr};
}

/// Inverse transform; exact in real arithmetic, result not clamped.
inline std::array<double, 3> luma_chroma_to_rgb(double y, double cb, double cr) {
  const double r = y + cr * (1.0 - kLumaR) / 0.5;
  const double b = y + cb * (1.0 - kLumaB) / 0.5;
  const double g = (y - kLumaR * r - kLumaB * b) / kLumaG;
  return {r, g, b};
}

/// Convert three congruent RGB planes into a Frame.
inline Frame frame_from_rgb(const Plane& r, const Plane& g, const Plane& b, int index = 0) {
  if (!r.same_size(g) || !r.same_size(b))
    throw std::invalid_argument("rgb planes disagree in size");
  Frame f(r.width(), r.height(), index);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto ycc = rgb_to_luma_chroma(r.data()[i], g.data()[i], b.data()[i]);
    f.y.data()[i] = ycc[0];
    f.cb.data()[i] = ycc[1];
    f.cr.data()[i] = ycc[2];
  }
  return f;
}

}  // namespace tremorscope
