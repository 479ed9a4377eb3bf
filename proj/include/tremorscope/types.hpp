#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tremorscope {

// Error categories match the CLI exit-code contract: config=2, io=3, processing=4.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ProcessingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row-major 2-D sample grid.
template <typename T>
class BasicPlane {
 public:
  BasicPlane() = default;
  BasicPlane(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(checked_size(width, height), fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* row(int y) { return data_.data() + static_cast<std::size_t>(y) * width_; }
  const T* row(int y) const { return data_.data() + static_cast<std::size_t>(y) * width_; }

  T& operator()(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  const T& operator()(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  bool same_size(const BasicPlane& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  void fill(T value) { data_.assign(data_.size(), value); }

 private:
  static std::size_t checked_size(int width, int height) {
    if (width <= 0 || height <= 0)
      throw std::invalid_argument("plane dimensions must be positive");
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using Plane = BasicPlane<double>;

/// One video frame in planar 4:4:4 luma-chroma form.
/// Luma samples live in [0,1], chroma in [-0.5,0.5]; all three planes share dimensions.
struct Frame {
  Plane y;
  Plane cb;
  Plane cr;
  int index = 0;

  Frame() = default;
  Frame(int width, int height, int frame_index = 0)
      : y(width, height), cb(width, height), cr(width, height), index(frame_index) {}

  int width() const { return y.width(); }
  int height() const { return y.height(); }

  bool same_size(const Frame& other) const { return y.same_size(other.y); }

  /// Throws ProcessingError if planes disagree in size or samples violate ranges.
  void validate() const {
    if (!y.same_size(cb) || !y.same_size(cr))
      throw ProcessingError("frame planes disagree in size");
    check_plane(y, 0.0, 1.0, "luma");
    check_plane(cb, -0.5, 0.5, "chroma");
    check_plane(cr, -0.5, 0.5, "chroma");
  }

  /// Clamp all samples into their valid ranges (final frame-assembly step).
  void clamp() {
    clamp_plane(y, 0.0, 1.0);
    clamp_plane(cb, -0.5, 0.5);
    clamp_plane(cr, -0.5, 0.5);
  }

 private:
  static void check_plane(const Plane& p, double lo, double hi, const char* what) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double v = p.data()[i];
      if (!std::isfinite(v) || v < lo || v > hi)
        throw ProcessingError(std::string(what) + " sample out of range");
    }
  }
  static void clamp_plane(Plane& p, double lo, double hi) {
    double* d = p.data();
    for (std::size_t i = 0; i < p.size(); ++i)
      d[i] = d[i] < lo ? lo : (d[i] > hi ? hi : d[i]);
  }
};

/// Ordered frames plus timing. Frames share dimensions; indices run 0..n-1.
struct VideoSequence {
  std::vector<Frame> frames;
  double fps = 30.0;

  std::size_t frame_count() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
  int width() const { return frames.empty() ? 0 : frames.front().width(); }
  int height() const { return frames.empty() ? 0 : frames.front().height(); }
  double duration_s() const { return fps > 0 ? frames.size() / fps : 0.0; }

  void validate() const {
    if (!(fps >= 1.0 && fps <= 240.0))
      throw ProcessingError("fps outside [1,240]");
    for (std::size_t i = 0; i < frames.size(); ++i) {
      if (!frames[i].same_size(frames.front()))
        throw ProcessingError("mixed frame dimensions in sequence");
      if (frames[i].index != static_cast<int>(i))
        throw ProcessingError("frame indices not consecutive from 0");
    }
  }
};

/// Pixel rectangle, origin top-left; covers [x, x+w) x [y, y+h).
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool inside(int frame_w, int frame_h) const {
    return w > 0 && h > 0 && x >= 0 && y >= 0 && x + w <= frame_w && y + h <= frame_h;
  }
  std::size_t area() const { return static_cast<std::size_t>(w) * h; }
};

}  // namespace tremorscope
