#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <png.h>

#include "tremorscope/color.hpp"
#include "tremorscope/parallel.hpp"
#include "tremorscope/types.hpp"

// Sequence I/O: directories of PNG/PPM frames (lexicographic order = time
// order) and uncompressed y4m containers. Everything converts to the internal
// planar 4:4:4 luma-chroma representation on load; subsampled y4m chroma is
// bilinearly upsampled. y4m output is always written as C444 so that
// save-then-load reproduces every sample within 8-bit quantization.

namespace tremorscope {

enum class SequenceFormat { kAuto, kFrameDirPng, kFrameDirPpm, kY4m };

namespace io_detail {

inline std::uint8_t to_byte(double v) {
  const long q = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
  return static_cast<std::uint8_t>(q);
}
inline double from_byte(std::uint8_t b) { return b / 255.0; }

// Chroma maps through byte 128 = zero, so the gray axis survives round trips.
inline std::uint8_t chroma_to_byte(double c) {
  const long q = std::lround(std::clamp(c, -0.5, 0.5) * 255.0) + 128;
  return static_cast<std::uint8_t>(std::clamp(q, 0L, 255L));
}
// byte 0 would decode to -128/255, a hair outside the chroma range
inline double chroma_from_byte(std::uint8_t b) {
  return std::max(-0.5, (static_cast<int>(b) - 128) / 255.0);
}

/// Center-aligned bilinear resize (used to bring subsampled chroma to 4:4:4).
inline Plane resize_bilinear(const Plane& src, int out_w, int out_h) {
  if (src.width() == out_w && src.height() == out_h) return src;
  Plane dst(out_w, out_h);
  const double sx_scale = static_cast<double>(src.width()) / out_w;
  const double sy_scale = static_cast<double>(src.height()) / out_h;
  for (int y = 0; y < out_h; ++y) {
    double sy = (y + 0.5) * sy_scale - 0.5;
    sy = std::clamp(sy, 0.0, static_cast<double>(src.height() - 1));
    const int y0 = static_cast<int>(sy);
    const int y1 = std::min(y0 + 1, src.height() - 1);
    const double ty = sy - y0;
    const double* r0 = src.row(y0);
    const double* r1 = src.row(y1);
    double* out = dst.row(y);
    for (int x = 0; x < out_w; ++x) {
      double sx = (x + 0.5) * sx_scale - 0.5;
      sx = std::clamp(sx, 0.0, static_cast<double>(src.width() - 1));
      const int x0 = static_cast<int>(sx);
      const int x1 = std::min(x0 + 1, src.width() - 1);
      const double tx = sx - x0;
      const double top = r0[x0] + tx * (r0[x1] - r0[x0]);
      const double bot = r1[x0] + tx * (r1[x1] - r1[x0]);
      out[x] = top + ty * (bot - top);
    }
  }
  return dst;
}

inline Frame frame_from_rgb8(const std::vector<std::uint8_t>& rgb, int w, int h, int index) {
  Frame f(w, h, index);
  for (std::size_t i = 0; i < static_cast<std::size_t>(w) * h; ++i) {
    const auto ycc = rgb_to_luma_chroma(from_byte(rgb[3 * i]), from_byte(rgb[3 * i + 1]),
                                        from_byte(rgb[3 * i + 2]));
    f.y.data()[i] = ycc[0];
    f.cb.data()[i] = ycc[1];
    f.cr.data()[i] = ycc[2];
  }
  return f;
}

inline std::vector<std::uint8_t> rgb8_from_frame(const Frame& f) {
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(f.width()) * f.height() * 3);
  for (std::size_t i = 0; i < static_cast<std::size_t>(f.width()) * f.height(); ++i) {
    const auto c = luma_chroma_to_rgb(f.y.data()[i], f.cb.data()[i], f.cr.data()[i]);
    rgb[3 * i] = to_byte(c[0]);
    rgb[3 * i + 1] = to_byte(c[1]);
    rgb[3 * i + 2] = to_byte(c[2]);
  }
  return rgb;
}

// ---- PPM (P5/P6, 8-bit) ----

inline Frame load_ppm(const std::filesystem::path& path, int index) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P6" && magic != "P5") throw IoError("unsupported PPM magic in " + path.string());
  auto next_int = [&]() {
    int v;
    for (;;) {
      in >> std::ws;
      if (in.peek() == '#') {
        std::string comment;
        std::getline(in, comment);
        continue;
      }
      if (!(in >> v)) throw IoError("malformed PPM header in " + path.string());
      return v;
    }
  };
  const int w = next_int(), h = next_int(), maxval = next_int();
  if (w <= 0 || h <= 0) throw IoError("bad PPM dimensions in " + path.string());
  if (maxval != 255) throw IoError("unsupported PPM maxval (want 255) in " + path.string());
  in.get();  // single whitespace after header
  const int channels = magic == "P6" ? 3 : 1;
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(w) * h * channels);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size()))
    throw IoError("truncated PPM payload in " + path.string());
  if (channels == 1) {
    Frame f(w, h, index);
    for (std::size_t i = 0; i < static_cast<std::size_t>(w) * h; ++i) {
      f.y.data()[i] = from_byte(buf[i]);
      f.cb.data()[i] = 0;
      f.cr.data()[i] = 0;
    }
    return f;
  }
  return frame_from_rgb8(buf, w, h, index);
}

inline void save_ppm(const Frame& f, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P6\n" << f.width() << " " << f.height() << "\n255\n";
  const auto rgb = rgb8_from_frame(f);
  out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
  if (!out) throw IoError("short write to " + path.string());
}

// ---- PNG (libpng simplified API, 8-bit RGB) ----

inline Frame load_png(const std::filesystem::path& path, int index) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    throw IoError("cannot read PNG " + path.string() + ": " + image.message);
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  return frame_from_rgb8(buf, static_cast<int>(image.width), static_cast<int>(image.height),
                         index);
}

inline void save_png(const Frame& f, const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(f.width());
  image.height = static_cast<png_uint_32>(f.height());
  image.format = PNG_FORMAT_RGB;
  const auto rgb = rgb8_from_frame(f);
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, rgb.data(), 0, nullptr))
    throw IoError("cannot write PNG " + path.string() + ": " + image.message);
}

}  // namespace io_detail

/// Load one PNG or PPM image as a frame (extension decides the codec).
inline Frame load_frame_image(const std::filesystem::path& path, int index = 0) {
  const std::string ext = path.extension().string();
  if (ext == ".png" || ext == ".PNG") return io_detail::load_png(path, index);
  if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return io_detail::load_ppm(path, index);
  throw IoError("unsupported image extension: " + path.string());
}

inline void save_frame_image(const Frame& f, const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".png") return io_detail::save_png(f, path);
  if (ext == ".ppm") return io_detail::save_ppm(f, path);
  throw IoError("unsupported image extension: " + path.string());
}

/// Streaming y4m parser. Accepts C420(jpeg|mpeg2|paldv), C422, C444 and mono;
/// chroma is upsampled to 4:4:4 on the fly.
class Y4mReader {
 public:
  explicit Y4mReader(std::istream& in) : in_(in) {
    std::string header;
    if (!std::getline(in_, header)) throw IoError("empty y4m stream");
    std::istringstream hs(header);
    std::string tok;
    hs >> tok;
    if (tok != "YUV4MPEG2") throw IoError("not a y4m stream (bad magic)");
    std::string colorspace = "420jpeg";
    int fps_num = 0, fps_den = 1;
    while (hs >> tok) {
      if (tok.empty()) continue;
      switch (tok[0]) {
        case 'W': width_ = std::atoi(tok.c_str() + 1); break;
        case 'H': height_ = std::atoi(tok.c_str() + 1); break;
        case 'F': {
          if (std::sscanf(tok.c_str() + 1, "%d:%d", &fps_num, &fps_den) != 2 || fps_den <= 0)
            throw IoError("bad y4m frame-rate token: " + tok);
          break;
        }
        case 'C': colorspace = tok.substr(1); break;
        default: break;  // interlacing / aspect / extensions ignored
      }
    }
    if (width_ <= 0 || height_ <= 0) throw IoError("y4m header missing W/H");
    if (fps_num <= 0) throw IoError("y4m header missing frame rate");
    fps_ = static_cast<double>(fps_num) / fps_den;
    if (fps_ < 1.0 || fps_ > 240.0)
      throw IoError("y4m frame rate outside supported range [1,240]");

    if (colorspace.rfind("420", 0) == 0) {
      chroma_w_ = (width_ + 1) / 2;
      chroma_h_ = (height_ + 1) / 2;
    } else if (colorspace.rfind("422", 0) == 0) {
      chroma_w_ = (width_ + 1) / 2;
      chroma_h_ = height_;
    } else if (colorspace.rfind("444", 0) == 0) {
      chroma_w_ = width_;
      chroma_h_ = height_;
    } else if (colorspace == "mono") {
      chroma_w_ = 0;
      chroma_h_ = 0;
    } else {
      throw IoError("unsupported y4m pixel format C" + colorspace);
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  double fps() const { return fps_; }

  /// Next frame, or nullopt at clean end of stream.
  std::optional<Frame> next() {
    std::string line;
    if (!std::getline(in_, line)) return std::nullopt;
    if (line.rfind("FRAME", 0) != 0) throw IoError("y4m stream missing FRAME marker");

    const std::size_t luma_size = static_cast<std::size_t>(width_) * height_;
    const std::size_t chroma_size = static_cast<std::size_t>(chroma_w_) * chroma_h_;
    buf_.resize(luma_size + 2 * chroma_size);
    in_.read(reinterpret_cast<char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
    if (in_.gcount() != static_cast<std::streamsize>(buf_.size()))
      throw IoError("truncated y4m frame payload");

    Frame f(width_, height_, index_++);
    for (std::size_t i = 0; i < luma_size; ++i) f.y.data()[i] = io_detail::from_byte(buf_[i]);
    if (chroma_size == 0) {
      f.cb.fill(0.0);
      f.cr.fill(0.0);
      return f;
    }
    Plane cb(chroma_w_, chroma_h_), cr(chroma_w_, chroma_h_);
    for (std::size_t i = 0; i < chroma_size; ++i) {
      cb.data()[i] = io_detail::chroma_from_byte(buf_[luma_size + i]);
      cr.data()[i] = io_detail::chroma_from_byte(buf_[luma_size + chroma_size + i]);
    }
    f.cb = io_detail::resize_bilinear(cb, width_, height_);
    f.cr = io_detail::resize_bilinear(cr, width_, height_);
    return f;
  }

 private:
  std::istream& in_;
  int width_ = 0;
  int height_ = 0;
  int chroma_w_ = 0;
  int chroma_h_ = 0;
  double fps_ = 0;
  int index_ = 0;
  std::vector<std::uint8_t> buf_;
};

/// Writes uncompressed C444 y4m.
class Y4mWriter {
 public:
  Y4mWriter(std::ostream& out, int width, int height, double fps)
      : out_(out), width_(width), height_(height) {
    int num, den;
    rationalize_fps(fps, num, den);
    out_ << "YUV4MPEG2 W" << width << " H" << height << " F" << num << ":" << den
         << " Ip A1:1 C444\n";
    if (!out_) throw IoError("cannot write y4m header");
  }

  void write(const Frame& f) {
    if (f.width() != width_ || f.height() != height_)
      throw IoError("frame dimensions do not match y4m header");
    out_ << "FRAME\n";
    const std::size_t n = static_cast<std::size_t>(width_) * height_;
    buf_.resize(3 * n);
    for (std::size_t i = 0; i < n; ++i) buf_[i] = io_detail::to_byte(f.y.data()[i]);
    for (std::size_t i = 0; i < n; ++i) buf_[n + i] = io_detail::chroma_to_byte(f.cb.data()[i]);
    for (std::size_t i = 0; i < n; ++i)
      buf_[2 * n + i] = io_detail::chroma_to_byte(f.cr.data()[i]);
    out_.write(reinterpret_cast<const char*>(buf_.data()),
               static_cast<std::streamsize>(buf_.size()));
    if (!out_) throw IoError("short write on y4m stream");
  }

  static void rationalize_fps(double fps, int& num, int& den) {
    if (std::abs(fps - std::round(fps)) < 1e-9) {
      num = static_cast<int>(std::lround(fps));
      den = 1;
      return;
    }
    const double n1001 = fps * 1001.0;
    if (std::abs(n1001 - std::round(n1001)) < 1e-6) {
      num = static_cast<int>(std::lround(n1001));
      den = 1001;
      return;
    }
    num = static_cast<int>(std::lround(fps * 1000.0));
    den = 1000;
  }

 private:
  std::ostream& out_;
  int width_;
  int height_;
  std::vector<std::uint8_t> buf_;
};

namespace io_detail {

inline VideoSequence load_frame_dir(const std::filesystem::path& dir, double fps) {
  if (!(fps > 0))
    throw ConfigError("frame directories carry no timing; an fps value is required");
  if (fps < 1.0 || fps > 240.0) throw ConfigError("fps outside supported range [1,240]");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".png" || ext == ".ppm" || ext == ".pgm" || ext == ".pnm")
      files.push_back(entry.path());
  }
  if (files.empty()) throw IoError("no frame images found in " + dir.string());
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename() < b.filename(); });

  VideoSequence seq;
  seq.fps = fps;
  seq.frames.resize(files.size());
  std::vector<std::string> errors(files.size());
  parallel_for(0, static_cast<int>(files.size()), [&](int i) {
    try {
      seq.frames[i] = load_frame_image(files[i], i);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (const auto& e : errors)
    if (!e.empty()) throw IoError(e);
  for (const Frame& f : seq.frames)
    if (!f.same_size(seq.frames.front()))
      throw IoError("mixed frame dimensions in " + dir.string());
  return seq;
}

inline void save_frame_dir(const VideoSequence& seq, const std::filesystem::path& dir,
                           const char* ext) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string());
  std::vector<std::string> errors(seq.frame_count());
  parallel_for(0, static_cast<int>(seq.frame_count()), [&](int i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06d%s", i, ext);
    try {
      save_frame_image(seq.frames[i], dir / name);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (const auto& e : errors)
    if (!e.empty()) throw IoError(e);
}

}  // namespace io_detail

/// Load a sequence from a frame directory or a y4m file. For frame
/// directories, fps must be supplied (they carry no timing).
inline VideoSequence load_sequence(const std::filesystem::path& path,
                                   SequenceFormat format = SequenceFormat::kAuto,
                                   double fps = 0) {
  if (format == SequenceFormat::kAuto) {
    if (std::filesystem::is_directory(path)) {
      format = SequenceFormat::kFrameDirPng;  // reader accepts both image kinds
    } else if (path.extension() == ".y4m") {
      format = SequenceFormat::kY4m;
    } else {
      throw IoError("cannot infer input format for " + path.string());
    }
  }
  if (format == SequenceFormat::kY4m) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    Y4mReader reader(in);
    VideoSequence seq;
    seq.fps = reader.fps();
    while (auto f = reader.next()) seq.frames.push_back(std::move(*f));
    if (seq.empty()) throw IoError("y4m stream contains no frames: " + path.string());
    return seq;
  }
  return io_detail::load_frame_dir(path, fps);
}

inline void save_sequence(const VideoSequence& seq, const std::filesystem::path& path,
                          SequenceFormat format = SequenceFormat::kAuto) {
  if (seq.empty()) throw ProcessingError("cannot save an empty sequence");
  if (format == SequenceFormat::kAuto)
    format = path.extension() == ".y4m" ? SequenceFormat::kY4m : SequenceFormat::kFrameDirPng;
  switch (format) {
    case SequenceFormat::kY4m: {
      std::ofstream out(path, std::ios::binary);
      if (!out) throw IoError("cannot write " + path.string());
      Y4mWriter writer(out, seq.width(), seq.height(), seq.fps);
      for (const Frame& f : seq.frames) writer.write(f);
      break;
    }
    case SequenceFormat::kFrameDirPng:
      io_detail::save_frame_dir(seq, path, ".png");
      break;
    case SequenceFormat::kFrameDirPpm:
      io_detail::save_frame_dir(seq, path, ".ppm");
      break;
    case SequenceFormat::kAuto:
      break;  // unreachable
  }
}

}  // namespace tremorscope
