#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "srwd/error.hpp"
#include "srwd/tensor.hpp"

namespace srwd {

using cplx = std::complex<double>;

/// Single-channel complex 2D array, DC at (0,0).
struct Spectrum {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<cplx> bins;

  Spectrum() = default;
  Spectrum(std::size_t h, std::size_t w, cplx fill = {}) : height(h), width(w), bins(h * w, fill) {}

  cplx& operator()(std::size_t y, std::size_t x) { return bins[y * width + x]; }
  cplx operator()(std::size_t y, std::size_t x) const { return bins[y * width + x]; }
  std::size_t size() const { return bins.size(); }
};

namespace detail {

// FFTW planning is not thread-safe; execution with the new-array interface is.
class FftPlanCache {
 public:
  static FftPlanCache& instance() {
    static FftPlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t h, std::size_t w, int sign) {
    std::lock_guard lock(mu_);
    auto key = std::make_tuple(h, w, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<cplx> in(h * w), out(h * w);
    fftw_plan p = fftw_plan_dft_2d(static_cast<int>(h), static_cast<int>(w),
                                   reinterpret_cast<fftw_complex*>(in.data()),
                                   reinterpret_cast<fftw_complex*>(out.data()), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, p);
    return p;
  }

  ~FftPlanCache() {
    for (auto& [key, p] : plans_) fftw_destroy_plan(p);
  }

 private:
  FftPlanCache() = default;
  std::mutex mu_;
  std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

inline void execute(const Spectrum& in, Spectrum& out, int sign) {
  out.height = in.height;
  out.width = in.width;
  out.bins.resize(in.bins.size());
  fftw_plan p = FftPlanCache::instance().get(in.height, in.width, sign);
  // FFTW does not modify the input of an out-of-place c2c transform.
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.bins.data())),
                   reinterpret_cast<fftw_complex*>(out.bins.data()));
}

}  // namespace detail

/// Unnormalized forward DFT (e^{-i...}) of a complex array.
inline Spectrum fft2(const Spectrum& in) {
  require(in.height >= 1 && in.width >= 1, ErrorCode::BadShape, "fft2: empty input");
  Spectrum out;
  detail::execute(in, out, FFTW_FORWARD);
  return out;
}

/// Forward DFT of a real H x W plane.
inline Spectrum fft2(std::span<const double> plane, std::size_t h, std::size_t w) {
  require(plane.size() == h * w, ErrorCode::BadShape, "fft2: plane size mismatch");
  Spectrum in(h, w);
  for (std::size_t i = 0; i < plane.size(); ++i) in.bins[i] = plane[i];
  return fft2(in);
}

/// Normalized inverse DFT (includes the 1/(HW) factor).
inline Spectrum ifft2(const Spectrum& in) {
  require(in.height >= 1 && in.width >= 1, ErrorCode::BadShape, "ifft2: empty input");
  Spectrum out;
  detail::execute(in, out, FFTW_BACKWARD);
  const double scale = 1.0 / double(in.size());
  for (auto& v : out.bins) v *= scale;
  return out;
}

/// Real part of the normalized inverse DFT.
inline std::vector<double> ifft2_real(const Spectrum& in) {
  Spectrum c = ifft2(in);
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c.bins[i].real();
  return out;
}

/// Zero-pads the kernel to h x w and circularly shifts its center tap to
/// (0,0) before transforming, so pointwise products realize circular
/// convolution with the kernel centered on each pixel.
inline Spectrum psf_to_otf(const Kernel& k, std::size_t h, std::size_t w) {
  require(k.side() <= h && k.side() <= w, ErrorCode::KernelTooLarge,
          "kernel side " + std::to_string(k.side()) + " exceeds " + std::to_string(h) + "x" +
              std::to_string(w));
  const std::size_t r = k.radius();
  Spectrum pad(h, w);
  for (std::size_t i = 0; i < k.side(); ++i) {
    const std::size_t y = (i + h - r) % h;
    for (std::size_t j = 0; j < k.side(); ++j) {
      const std::size_t x = (j + w - r) % w;
      pad(y, x) += k(i, j);
    }
  }
  return fft2(pad);
}

}  // namespace srwd
