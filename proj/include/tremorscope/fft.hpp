#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

#include "tremorscope/types.hpp"

// Thin FFTW3 front end. Plans are cached per transform geometry and created
// under a lock (FFTW plan creation is not thread-safe); execution uses the
// new-array interface, which is safe to call concurrently on distinct buffers.
// All plans use FFTW_ESTIMATE so results are reproducible run to run.

namespace tremorscope::fft {

namespace detail {

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanKey {
  int kind;  // 0=r2c 1d, 1=c2r 1d, 2=c2c fwd 2d
  int n0;
  int n1;
  auto operator<=>(const PlanKey&) const = default;
};

struct PlanCache {
  std::map<PlanKey, fftw_plan> plans;
  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }
};

inline fftw_plan get_plan(const PlanKey& key) {
  static PlanCache cache_holder;
  auto& cache = cache_holder.plans;
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  fftw_plan plan = nullptr;
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  switch (key.kind) {
    case 0: {
      std::vector<double> in(key.n0);
      std::vector<fftw_complex> out(key.n0 / 2 + 1);
      plan = fftw_plan_dft_r2c_1d(key.n0, in.data(), out.data(), flags);
      break;
    }
    case 1: {
      std::vector<fftw_complex> in(key.n0 / 2 + 1);
      std::vector<double> out(key.n0);
      plan = fftw_plan_dft_c2r_1d(key.n0, in.data(), out.data(), flags);
      break;
    }
    case 2:
    case 3: {
      std::vector<fftw_complex> buf(static_cast<std::size_t>(key.n0) * key.n1);
      plan = fftw_plan_dft_2d(key.n0, key.n1, buf.data(), buf.data(),
                              key.kind == 2 ? FFTW_FORWARD : FFTW_BACKWARD, flags);
      break;
    }
    default:
      throw std::logic_error("unknown fft plan kind");
  }
  if (!plan) throw ProcessingError("fftw plan creation failed");
  cache.emplace(key, plan);
  return plan;
}

inline fftw_complex* as_fftw(std::complex<double>* p) {
  return reinterpret_cast<fftw_complex*>(p);
}

}  // namespace detail

/// Real-to-complex forward transform; out must hold n/2+1 bins.
inline void forward_r2c(std::span<const double> in, std::span<std::complex<double>> out) {
  const int n = static_cast<int>(in.size());
  if (out.size() != static_cast<std::size_t>(n / 2 + 1))
    throw std::invalid_argument("r2c output size must be n/2+1");
  fftw_plan plan = detail::get_plan({0, n, 0});
  fftw_execute_dft_r2c(plan, const_cast<double*>(in.data()), detail::as_fftw(out.data()));
}

/// Complex-to-real inverse, scaled by 1/n (round trip is the identity).
/// The spectrum argument is preserved (FFTW's c2r would normally clobber it).
inline void inverse_c2r(std::span<const std::complex<double>> in, std::span<double> out) {
  const int n = static_cast<int>(out.size());
  if (in.size() != static_cast<std::size_t>(n / 2 + 1))
    throw std::invalid_argument("c2r input size must be n/2+1");
  thread_local std::vector<std::complex<double>> scratch;
  scratch.assign(in.begin(), in.end());
  fftw_plan plan = detail::get_plan({1, n, 0});
  fftw_execute_dft_c2r(plan, detail::as_fftw(scratch.data()), out.data());
  const double scale = 1.0 / n;
  for (int i = 0; i < n; ++i) out[i] *= scale;
}

/// In-place 2-D complex forward transform of an h x w row-major grid.
inline void forward_c2c_2d(std::vector<std::complex<double>>& grid, int w, int h) {
  if (grid.size() != static_cast<std::size_t>(w) * h)
    throw std::invalid_argument("grid size mismatch");
  fftw_plan plan = detail::get_plan({2, h, w});
  fftw_execute_dft(plan, detail::as_fftw(grid.data()), detail::as_fftw(grid.data()));
}

/// In-place 2-D complex inverse transform, scaled by 1/(w*h).
inline void inverse_c2c_2d(std::vector<std::complex<double>>& grid, int w, int h) {
  if (grid.size() != static_cast<std::size_t>(w) * h)
    throw std::invalid_argument("grid size mismatch");
  fftw_plan plan = detail::get_plan({3, h, w});
  fftw_execute_dft(plan, detail::as_fftw(grid.data()), detail::as_fftw(grid.data()));
  const double scale = 1.0 / (static_cast<double>(w) * h);
  for (auto& v : grid) v *= scale;
}

}  // namespace tremorscope::fft
