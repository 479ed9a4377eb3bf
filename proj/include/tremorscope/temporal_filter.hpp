#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "tremorscope/fft.hpp"
#include "tremorscope/types.hpp"

namespace tremorscope {

/// Offline frequency-mask bandpass: zeroes every DFT bin whose frequency lies
/// outside [f_lo, f_hi] (edges inclusive, DC always removed). Linear and
/// zero-phase; the workhorse of the offline temporal magnification path.
inline std::vector<double> ideal_bandpass(std::span<const double> x, double fs, double f_lo,
                                          double f_hi) {
  if (!(fs > 0) || !(f_lo > 0) || !(f_lo < f_hi) || !(f_hi < fs / 2))
    throw ConfigError("bandpass requires 0 < f_lo < f_hi < fs/2");
  const int n = static_cast<int>(x.size());
  std::vector<std::complex<double>> spec(n / 2 + 1);
  fft::forward_r2c(x, spec);
  for (int k = 0; k <= n / 2; ++k) {
    const double f = k * fs / n;
    if (f < f_lo || f > f_hi) spec[k] = 0.0;
  }
  std::vector<double> out(n);
  fft::inverse_c2r(spec, out);
  return out;
}

/// Second-order section, direct form II transposed, normalized (a0 = 1).
struct BiquadCoeffs {
  double b0 = 1, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;

  // Butterworth (Q = 1/sqrt(2)) designs via the bilinear transform.
  static BiquadCoeffs lowpass(double fc, double fs) { return design(fc, fs, false); }
  static BiquadCoeffs highpass(double fc, double fs) { return design(fc, fs, true); }

  std::complex<double> response(double f, double fs) const {
    const std::complex<double> z = std::polar(1.0, -2.0 * std::numbers::pi * f / fs);
    return (b0 + (b1 + b2 * z) * z) / (1.0 + (a1 + a2 * z) * z);
  }

 private:
  static BiquadCoeffs design(double fc, double fs, bool high) {
    const double w0 = 2.0 * std::numbers::pi * fc / fs;
    const double alpha = std::sin(w0) / std::sqrt(2.0);
    const double c = std::cos(w0);
    const double a0 = 1.0 + alpha;
    BiquadCoeffs q;
    if (high) {
      q.b0 = (1.0 + c) / 2.0 / a0;
      q.b1 = -(1.0 + c) / a0;
      q.b2 = q.b0;
    } else {
      q.b0 = (1.0 - c) / 2.0 / a0;
      q.b1 = (1.0 - c) / a0;
      q.b2 = q.b0;
    }
    q.a1 = -2.0 * c / a0;
    q.a2 = (1.0 - alpha) / a0;
    return q;
  }
};

struct BiquadState {
  double w1 = 0, w2 = 0;

  double step(const BiquadCoeffs& q, double x) {
    const double y = q.b0 * x + w1;
    w1 = q.b1 * x - q.a1 * y + w2;
    w2 = q.b2 * x - q.a2 * y;
    return y;
  }

  /// Set the steady state for a constant input, so the first sample of a
  /// stream produces the filter's DC response instead of a startup transient.
  void prime(const BiquadCoeffs& q, double x0) {
    const double y0 = x0 * (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
    w2 = q.b2 * x0 - q.a2 * y0;
    w1 = q.b1 * x0 - q.a1 * y0 + w2;
  }
};

/// Causal streaming bandpass: Butterworth high-pass at f_lo cascaded with
/// Butterworth low-pass at f_hi. O(1) state per sample stream.
struct BandpassIir {
  BiquadCoeffs hp;
  BiquadCoeffs lp;

  static BandpassIir design(double f_lo, double f_hi, double fs) {
    if (!(fs > 0) || !(f_lo > 0) || !(f_lo < f_hi) || !(f_hi < fs / 2))
      throw ConfigError("bandpass requires 0 < f_lo < f_hi < fs/2");
    return {BiquadCoeffs::highpass(f_lo, fs), BiquadCoeffs::lowpass(f_hi, fs)};
  }

  double gain_at(double f, double fs) const {
    return std::abs(hp.response(f, fs) * lp.response(f, fs));
  }
};

}  // namespace tremorscope
