#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "srwd/error.hpp"
#include "srwd/fft.hpp"
#include "srwd/tensor.hpp"

namespace srwd {

// ---------------------------------------------------------------------------
// Circular convolution
// ---------------------------------------------------------------------------

/// Convolution with a fixed kernel on a fixed H x W grid, periodic boundary.
/// The OTF is computed once; apply() works on any channel count.
class CircularConvolver {
 public:
  CircularConvolver() = default;
  CircularConvolver(const Kernel& k, std::size_t h, std::size_t w)
      : h_(h), w_(w), otf_(psf_to_otf(k, h, w)) {
    const std::size_t c = (k.side() / 2) * k.side() + k.side() / 2;
    identity_ = true;
    for (std::size_t i = 0; i < k.taps().size(); ++i)
      identity_ = identity_ && k.taps()[i] == (i == c ? 1.0 : 0.0);
  }

  std::size_t height() const { return h_; }
  std::size_t width() const { return w_; }
  const Spectrum& otf() const { return otf_; }

  /// adjoint=false: out(p) = sum_q k(q) x(p - q); adjoint=true: correlation.
  ImageTensor apply(const ImageTensor& x, bool adjoint = false) const {
    require(x.height() == h_ && x.width() == w_, ErrorCode::ShapeMismatch,
            "convolver grid does not match image");
    // A centered unit impulse is applied exactly rather than through the FFT.
    if (identity_) return x;
    ImageTensor out(x.channels(), h_, w_);
    out.set_range(x.range());
    for (std::size_t c = 0; c < x.channels(); ++c) {
      Spectrum X = fft2(x.plane(c), h_, w_);
      for (std::size_t i = 0; i < X.size(); ++i)
        X.bins[i] *= adjoint ? std::conj(otf_.bins[i]) : otf_.bins[i];
      auto plane = ifft2_real(X);
      std::copy(plane.begin(), plane.end(), out.plane(c).begin());
    }
    return out;
  }

 private:
  std::size_t h_ = 0, w_ = 0;
  Spectrum otf_;
  bool identity_ = false;
};

inline ImageTensor circ_conv(const ImageTensor& image, const Kernel& kernel, bool adjoint = false) {
  return CircularConvolver(kernel, image.height(), image.width()).apply(image, adjoint);
}

// ---------------------------------------------------------------------------
// Bicubic resampling
// ---------------------------------------------------------------------------

/// Keys cubic convolution kernel with a = -0.5.
inline double cubic_weight(double x) {
  constexpr double a = -0.5;
  const double ax = std::abs(x);
  const double ax2 = ax * ax, ax3 = ax2 * ax;
  if (ax <= 1.0) return (a + 2.0) * ax3 - (a + 3.0) * ax2 + 1.0;
  if (ax < 2.0) return a * ax3 - 5.0 * a * ax2 + 8.0 * a * ax - 4.0 * a;
  return 0.0;
}

enum class ResizeDirection { Down, Up };

/// Sparse 1D resampling matrix with periodic index wrapping. Row r lists the
/// (input index, weight) taps producing output sample r.
struct ResampleMatrix {
  std::size_t in_size = 0;
  std::size_t out_size = 0;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;

  /// Downsampling n -> n/s. With antialias the cubic support is widened by s.
  static ResampleMatrix downsample(std::size_t n, std::size_t s, bool antialias) {
    ResampleMatrix m;
    m.in_size = n;
    m.out_size = n / s;
    m.rows.resize(m.out_size);
    const double stretch = antialias ? double(s) : 1.0;
    for (std::size_t j = 0; j < m.out_size; ++j) {
      const double center = (double(j) + 0.5) * double(s) - 0.5;
      const long lo = static_cast<long>(std::ceil(center - 2.0 * stretch));
      const long hi = static_cast<long>(std::floor(center + 2.0 * stretch));
      m.rows[j] = taps(lo, hi, n, [&](long i) { return cubic_weight((double(i) - center) / stretch); });
    }
    return m;
  }

  /// Interpolating upsampling n -> n*s on the pixel-center grid.
  static ResampleMatrix upsample(std::size_t n, std::size_t s) {
    ResampleMatrix m;
    m.in_size = n;
    m.out_size = n * s;
    m.rows.resize(m.out_size);
    for (std::size_t i = 0; i < m.out_size; ++i) {
      const double u = (double(i) + 0.5) / double(s) - 0.5;
      const long base = static_cast<long>(std::floor(u));
      m.rows[i] = taps(base - 1, base + 2, n, [&](long j) { return cubic_weight(u - double(j)); });
    }
    return m;
  }

  /// Applies along the last axis of a rows x in_size block (or out_size
  /// block when transposed).
  std::vector<double> apply_rows(std::span<const double> src, std::size_t nrows, bool transposed) const {
    const std::size_t src_w = transposed ? out_size : in_size;
    const std::size_t dst_w = transposed ? in_size : out_size;
    std::vector<double> dst(nrows * dst_w, 0.0);
    for (std::size_t y = 0; y < nrows; ++y) {
      const double* s = src.data() + y * src_w;
      double* d = dst.data() + y * dst_w;
      for (std::size_t r = 0; r < out_size; ++r) {
        if (!transposed) {
          double acc = 0.0;
          for (auto [i, wgt] : rows[r]) acc += wgt * s[i];
          d[r] = acc;
        } else {
          for (auto [i, wgt] : rows[r]) d[i] += wgt * s[r];
        }
      }
    }
    return dst;
  }

  /// Applies along the first axis of an in_size x ncols block.
  std::vector<double> apply_cols(std::span<const double> src, std::size_t ncols, bool transposed) const {
    const std::size_t dst_h = transposed ? in_size : out_size;
    std::vector<double> dst(dst_h * ncols, 0.0);
    for (std::size_t r = 0; r < out_size; ++r) {
      for (auto [i, wgt] : rows[r]) {
        const double* s = src.data() + (transposed ? r : i) * ncols;
        double* d = dst.data() + (transposed ? i : r) * ncols;
        for (std::size_t x = 0; x < ncols; ++x) d[x] += wgt * s[x];
      }
    }
    return dst;
  }

 private:
  template <typename WeightFn>
  static std::vector<std::pair<std::size_t, double>> taps(long lo, long hi, std::size_t n, WeightFn fn) {
    std::vector<std::pair<std::size_t, double>> row;
    double total = 0.0;
    for (long i = lo; i <= hi; ++i) {
      const double wgt = fn(i);
      if (wgt == 0.0) continue;
      const long ln = static_cast<long>(n);
      const auto idx = static_cast<std::size_t>(((i % ln) + ln) % ln);
      auto it = std::find_if(row.begin(), row.end(), [&](auto& p) { return p.first == idx; });
      if (it == row.end())
        row.emplace_back(idx, wgt);
      else
        it->second += wgt;
      total += wgt;
    }
    for (auto& p : row) p.second /= total;
    return row;
  }
};

inline void check_scale(std::size_t s) {
  require(s >= 1 && s <= 4, ErrorCode::BadScale, "scale must be 1, 2, 3 or 4");
}

/// Separable resampling operator for a fixed high-resolution grid.
/// forward() maps the grid it was built for; adjoint() applies the exact
/// transpose of that linear map.
class Resampler {
 public:
  Resampler() = default;
  Resampler(std::size_t in_h, std::size_t in_w, std::size_t s, ResizeDirection dir, bool antialias)
      : s_(s), dir_(dir) {
    check_scale(s);
    if (dir == ResizeDirection::Down) {
      require(in_h % s == 0 && in_w % s == 0, ErrorCode::NonDivisibleDims,
              "image " + std::to_string(in_h) + "x" + std::to_string(in_w) +
                  " not divisible by scale " + std::to_string(s));
      rows_ = ResampleMatrix::downsample(in_h, s, antialias);
      cols_ = ResampleMatrix::downsample(in_w, s, antialias);
    } else {
      rows_ = ResampleMatrix::upsample(in_h, s);
      cols_ = ResampleMatrix::upsample(in_w, s);
    }
  }

  std::size_t in_height() const { return rows_.in_size; }
  std::size_t in_width() const { return cols_.in_size; }
  std::size_t out_height() const { return rows_.out_size; }
  std::size_t out_width() const { return cols_.out_size; }
  std::size_t scale() const { return s_; }
  ResizeDirection direction() const { return dir_; }

  ImageTensor forward(const ImageTensor& x) const { return run(x, false); }
  ImageTensor adjoint(const ImageTensor& x) const { return run(x, true); }

 private:
  ImageTensor run(const ImageTensor& x, bool transposed) const {
    const std::size_t ih = transposed ? out_height() : in_height();
    const std::size_t iw = transposed ? out_width() : in_width();
    const std::size_t oh = transposed ? in_height() : out_height();
    const std::size_t ow = transposed ? in_width() : out_width();
    require(x.height() == ih && x.width() == iw, ErrorCode::ShapeMismatch,
            "resampler input shape mismatch");
    ImageTensor out(x.channels(), oh, ow);
    out.set_range(x.range());
    for (std::size_t c = 0; c < x.channels(); ++c) {
      auto tmp = cols_.apply_rows(x.plane(c), ih, transposed);
      auto res = rows_.apply_cols(tmp, ow, transposed);
      std::copy(res.begin(), res.end(), out.plane(c).begin());
    }
    return out;
  }

  std::size_t s_ = 1;
  ResizeDirection dir_ = ResizeDirection::Down;
  ResampleMatrix rows_, cols_;
};

/// Bicubic resize by an integer factor. For Down, `image` is on the fine grid
/// unless adjoint is set, in which case it is on the coarse grid and the
/// transpose of the downsampling map is applied (and symmetrically for Up).
inline ImageTensor bicubic_resize(const ImageTensor& image, std::size_t s, ResizeDirection dir,
                                  bool antialias = true, bool adjoint = false) {
  check_scale(s);
  std::size_t h = image.height(), w = image.width();
  if (adjoint) {
    if (dir == ResizeDirection::Down) {
      h *= s;
      w *= s;
    } else {
      require(h % s == 0 && w % s == 0, ErrorCode::NonDivisibleDims,
              "adjoint upsampling input not divisible by scale");
      h /= s;
      w /= s;
    }
  }
  Resampler r(h, w, s, dir, antialias);
  return adjoint ? r.adjoint(image) : r.forward(image);
}

// ---------------------------------------------------------------------------
// DCT basis, pixel shuffle, box projection
// ---------------------------------------------------------------------------

/// The n*n - 1 non-DC atoms of the orthonormal 2D DCT-II basis, ordered by
/// (vertical frequency, horizontal frequency) row-major.
inline FilterBank dct_filter_bank(std::size_t n) {
  require(n >= 3 && n % 2 == 1, ErrorCode::BadSize, "DCT bank side must be odd and >= 3");
  std::vector<std::vector<double>> basis(n, std::vector<double>(n));
  for (std::size_t u = 0; u < n; ++u) {
    const double cu = u == 0 ? std::sqrt(1.0 / double(n)) : std::sqrt(2.0 / double(n));
    for (std::size_t x = 0; x < n; ++x)
      basis[u][x] = cu * std::cos(std::numbers::pi * (2.0 * double(x) + 1.0) * double(u) / (2.0 * double(n)));
  }
  FilterBank bank;
  bank.side = n;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (u == 0 && v == 0) continue;
      std::vector<double> taps(n * n);
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x) taps[y * n + x] = basis[u][y] * basis[v][x];
      bank.filters.emplace_back(n, std::move(taps));
    }
  }
  return bank;
}

/// Sub-pixel rearrangement: s^2*C x H x W -> C x sH x sW with
/// out[c][s*h + i][s*w + j] = in[c*s^2 + i*s + j][h][w]. inverse=true undoes it.
inline ImageTensor pixel_shuffle(const ImageTensor& t, std::size_t s, bool inverse = false) {
  require(s >= 1, ErrorCode::BadShape, "shuffle factor must be >= 1");
  if (!inverse) {
    require(t.channels() % (s * s) == 0, ErrorCode::BadShape,
            "channel count not divisible by s^2");
    const std::size_t C = t.channels() / (s * s);
    ImageTensor out(C, t.height() * s, t.width() * s);
    out.set_range(t.range());
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < s; ++j)
          for (std::size_t h = 0; h < t.height(); ++h)
            for (std::size_t w = 0; w < t.width(); ++w)
              out(c, h * s + i, w * s + j) = t(c * s * s + i * s + j, h, w);
    return out;
  }
  require(t.height() % s == 0 && t.width() % s == 0, ErrorCode::BadShape,
          "spatial dims not divisible by s");
  const std::size_t H = t.height() / s, W = t.width() / s;
  ImageTensor out(t.channels() * s * s, H, W);
  out.set_range(t.range());
  for (std::size_t c = 0; c < t.channels(); ++c)
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = 0; j < s; ++j)
        for (std::size_t h = 0; h < H; ++h)
          for (std::size_t w = 0; w < W; ++w)
            out(c * s * s + i * s + j, h, w) = t(c, h * s + i, w * s + j);
  return out;
}

inline ImageTensor clamp_project(const ImageTensor& image, double lo, double hi) {
  require(lo <= hi, ErrorCode::BadInterval, "clamp interval has lo > hi");
  ImageTensor out = image;
  for (double& v : out.data()) v = std::min(std::max(v, lo), hi);
  out.set_range({lo, hi});
  return out;
}

}  // namespace srwd
