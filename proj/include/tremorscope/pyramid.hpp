#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "tremorscope/types.hpp"

// Burt-Adelson Laplacian pyramid with the binomial [1 4 6 4 1]/16 kernel and
// reflect-101 borders. Downsampling is blur-then-decimate; upsampling is
// zero-insertion followed by the doubled kernel (the downsampler's adjoint).
// Because each band level stores the exact difference against the upsampled
// next level, collapse() reproduces the input to machine precision.

namespace tremorscope {

struct Pyramid {
  std::vector<Plane> levels;  // band-pass planes, level 0 = full resolution
  Plane residual;             // low-pass remainder
  int source_width = 0;
  int source_height = 0;

  int depth() const { return static_cast<int>(levels.size()); }

  bool congruent(const Pyramid& other) const {
    if (depth() != other.depth() || !residual.same_size(other.residual)) return false;
    for (int k = 0; k < depth(); ++k)
      if (!levels[k].same_size(other.levels[k])) return false;
    return true;
  }
};

/// Largest legal depth for the given dimensions (coarsest band level >= 4 px).
inline int max_pyramid_depth(int width, int height) {
  const int m = std::min(width, height);
  int depth = 1;
  while (m / (1 << depth) >= 4) ++depth;
  return depth;
}

/// Default depth: largest k with min-dim / 2^(k-1) >= 16, capped at 5.
inline int default_pyramid_depth(int width, int height) {
  const int m = std::min(width, height);
  int depth = 1;
  while (depth < 5 && m / (1 << depth) >= 16) ++depth;
  return depth;
}

namespace pyr_detail {

inline int reflect101(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

/// Blur with [1 4 6 4 1]/16 along both axes keeping even samples only.
inline Plane downsample(const Plane& src) {
  const int w = src.width(), h = src.height();
  const int dw = (w + 1) / 2, dh = (h + 1) / 2;

  Plane tmp(w, dh);
  for (int j = 0; j < dh; ++j) {
    const int y = 2 * j;
    const double* r0 = src.row(reflect101(y - 2, h));
    const double* r1 = src.row(reflect101(y - 1, h));
    const double* r2 = src.row(y);
    const double* r3 = src.row(reflect101(y + 1, h));
    const double* r4 = src.row(reflect101(y + 2, h));
    double* out = tmp.row(j);
    for (int x = 0; x < w; ++x)
      out[x] = (r0[x] + 4.0 * r1[x] + 6.0 * r2[x] + 4.0 * r3[x] + r4[x]) * (1.0 / 16.0);
  }

  Plane dst(dw, dh);
  const int safe_end = std::max(1, (w - 2) / 2);  // 2i+2 < w for i < safe_end
  for (int j = 0; j < dh; ++j) {
    const double* in = tmp.row(j);
    double* out = dst.row(j);
    auto tap = [&](int x) { return in[reflect101(x, w)]; };
    out[0] = (tap(-2) + 4.0 * tap(-1) + 6.0 * in[0] + 4.0 * tap(1) + tap(2)) * (1.0 / 16.0);
    for (int i = 1; i < safe_end; ++i) {
      const int x = 2 * i;
      out[i] =
          (in[x - 2] + 4.0 * in[x - 1] + 6.0 * in[x] + 4.0 * in[x + 1] + in[x + 2]) * (1.0 / 16.0);
    }
    for (int i = std::max(1, safe_end); i < dw; ++i) {
      const int x = 2 * i;
      out[i] = (tap(x - 2) + 4.0 * tap(x - 1) + 6.0 * in[x] + 4.0 * tap(x + 1) + tap(x + 2)) *
               (1.0 / 16.0);
    }
  }
  return dst;
}

// Zero-inserted sample accessor: position i on the expanded axis of length n,
// backed by source samples at even positions. Reflection happens on the
// expanded grid so up() stays the exact transpose of down().
inline double zsample(const double* s, int i, int n) {
  i = reflect101(i, n);
  return (i & 1) ? 0.0 : s[i >> 1];
}

/// Zero-insert to (target_w, target_h) and blur with 2*[1 4 6 4 1]/16.
inline Plane upsample(const Plane& src, int target_w, int target_h) {
  const int sw = src.width(), sh = src.height();
  if (sw != (target_w + 1) / 2 || sh != (target_h + 1) / 2)
    throw ProcessingError("upsample target incompatible with source dimensions");

  // vertical expansion: even rows get (s[i-1] + 6 s[i] + s[i+1])/8,
  // odd rows (s[i] + s[i+1])/2, with reflect-101 on the expanded grid
  Plane tmp(sw, target_h);
  for (int y = 0; y < target_h; ++y) {
    double* out = tmp.row(y);
    if ((y & 1) == 0) {
      const int i = y >> 1;
      const int im = (y >= 2) ? i - 1 : reflect101(y - 2, target_h) >> 1;
      const int ip = (y + 2 < target_h) ? i + 1 : reflect101(y + 2, target_h) >> 1;
      const double* a = src.row(im);
      const double* c = src.row(i);
      const double* b = src.row(ip);
      for (int x = 0; x < sw; ++x) out[x] = (a[x] + 6.0 * c[x] + b[x]) * (1.0 / 8.0);
    } else {
      const int i = y >> 1;
      const int ip = (y + 1 < target_h) ? i + 1 : reflect101(y + 1, target_h) >> 1;
      const double* a = src.row(i);
      const double* b = src.row(ip);
      for (int x = 0; x < sw; ++x) out[x] = (a[x] + b[x]) * 0.5;
    }
  }

  Plane dst(target_w, target_h);
  for (int y = 0; y < target_h; ++y) {
    const double* in = tmp.row(y);
    double* out = dst.row(y);
    // interior columns split by phase; borders via the generic accessor
    int x = 0;
    for (; x < std::min(2, target_w); ++x)
      out[x] = (zsample(in, x - 2, target_w) + 4.0 * zsample(in, x - 1, target_w) +
                6.0 * zsample(in, x, target_w) + 4.0 * zsample(in, x + 1, target_w) +
                zsample(in, x + 2, target_w)) *
               (2.0 / 16.0);
    const int end = std::max(2, target_w - 2);
    for (; x < end; ++x) {
      const int i = x >> 1;
      if ((x & 1) == 0)
        out[x] = (in[i - 1] + 6.0 * in[i] + in[i + 1]) * (1.0 / 8.0);
      else
        out[x] = (in[i] + in[i + 1]) * 0.5;
    }
    for (; x < target_w; ++x)
      out[x] = (zsample(in, x - 2, target_w) + 4.0 * zsample(in, x - 1, target_w) +
                6.0 * zsample(in, x, target_w) + 4.0 * zsample(in, x + 1, target_w) +
                zsample(in, x + 2, target_w)) *
               (2.0 / 16.0);
  }
  return dst;
}

}  // namespace pyr_detail

/// Decompose a plane into `depth` band-pass levels plus a low-pass residual.
inline Pyramid build_laplacian(const Plane& plane, int depth) {
  if (depth < 1) throw ConfigError("pyramid depth must be >= 1");
  const int m = std::min(plane.width(), plane.height());
  if (m / (1 << (depth - 1)) < 4)
    throw ConfigError("pyramid depth " + std::to_string(depth) + " too large for " +
                      std::to_string(plane.width()) + "x" + std::to_string(plane.height()));

  Pyramid pyr;
  pyr.source_width = plane.width();
  pyr.source_height = plane.height();
  pyr.levels.reserve(depth);

  Plane current = plane;
  for (int k = 0; k < depth; ++k) {
    Plane next = pyr_detail::downsample(current);
    Plane up = pyr_detail::upsample(next, current.width(), current.height());
    double* c = current.data();
    const double* u = up.data();
    for (std::size_t i = 0; i < current.size(); ++i) c[i] -= u[i];
    pyr.levels.push_back(std::move(current));
    current = std::move(next);
  }
  pyr.residual = std::move(current);
  return pyr;
}

/// Inverse of build_laplacian: recursive upsample-and-add.
inline Plane collapse(const Pyramid& pyr) {
  if (pyr.levels.empty()) throw ProcessingError("cannot collapse empty pyramid");
  Plane acc = pyr.residual;
  for (int k = pyr.depth() - 1; k >= 0; --k) {
    const Plane& level = pyr.levels[k];
    if (acc.width() != (level.width() + 1) / 2 || acc.height() != (level.height() + 1) / 2)
      throw ProcessingError("pyramid level dimension mismatch");
    Plane up = pyr_detail::upsample(acc, level.width(), level.height());
    double* u = up.data();
    const double* l = level.data();
    for (std::size_t i = 0; i < up.size(); ++i) u[i] += l[i];
    acc = std::move(up);
  }
  if (acc.width() != pyr.source_width || acc.height() != pyr.source_height)
    throw ProcessingError("pyramid level dimension mismatch");
  return acc;
}

}  // namespace tremorscope
