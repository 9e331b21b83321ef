#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "srwd/error.hpp"
#include "srwd/random.hpp"
#include "srwd/tensor.hpp"

namespace srwd {

/// Named view of one trainable array, used for optimizer state and
/// checkpoint blobs.
struct ParamView {
  std::string name;
  std::vector<std::size_t> shape;
  std::span<double> values;
};

/// out x in x side x side taps plus one bias per output channel.
struct ConvLayer {
  std::size_t out_channels = 0;
  std::size_t in_channels = 0;
  std::size_t side = 1;
  std::vector<double> taps;
  std::vector<double> bias;

  ConvLayer() = default;
  ConvLayer(std::size_t out, std::size_t in, std::size_t k)
      : out_channels(out), in_channels(in), side(k), taps(out * in * k * k, 0.0), bias(out, 0.0) {
    require(k % 2 == 1, ErrorCode::BadShape, "conv kernel side must be odd");
  }

  double& tap(std::size_t o, std::size_t i, std::size_t y, std::size_t x) {
    return taps[((o * in_channels + i) * side + y) * side + x];
  }
  double tap(std::size_t o, std::size_t i, std::size_t y, std::size_t x) const {
    return taps[((o * in_channels + i) * side + y) * side + x];
  }

  /// He-normal taps, zero bias.
  void init_he(Rng& rng) {
    std::normal_distribution<double> n(0.0, std::sqrt(2.0 / double(in_channels * side * side)));
    for (double& v : taps) v = n(rng);
    std::fill(bias.begin(), bias.end(), 0.0);
  }

  ConvLayer zeros_like() const { return ConvLayer(out_channels, in_channels, side); }

  void collect(const std::string& prefix, std::vector<ParamView>& out, bool with_bias = true) {
    out.push_back({prefix + ".weight", {out_channels, in_channels, side, side}, taps});
    if (with_bias) out.push_back({prefix + ".bias", {out_channels}, bias});
  }
};

namespace detail {

/// Circularly padded copy of one plane, r pixels on every side.
inline std::vector<double> pad_plane(std::span<const double> src, std::size_t H, std::size_t W,
                                     std::size_t r) {
  const std::size_t PW = W + 2 * r, PH = H + 2 * r;
  std::vector<double> dst(PH * PW);
  for (std::size_t y = 0; y < PH; ++y) {
    const std::size_t sy = (y + H * (r / H + 1) - r) % H;
    for (std::size_t x = 0; x < PW; ++x) dst[y * PW + x] = src[sy * W + (x + W * (r / W + 1) - r) % W];
  }
  return dst;
}

}  // namespace detail

/// Multi-channel correlation with circular padding (spatial size preserved):
///   out[o](p) = b[o] + sum_i sum_q w[o][i][q] x[i](p + q - r).
/// transposed=true applies the exact adjoint map (out_channels -> in_channels),
/// without bias. with_bias=false drops the bias of a forward layer.
inline ImageTensor conv2d(const ImageTensor& x, const ConvLayer& w, bool transposed = false,
                          bool with_bias = true) {
  const std::size_t src_ch = transposed ? w.out_channels : w.in_channels;
  const std::size_t dst_ch = transposed ? w.in_channels : w.out_channels;
  require(x.channels() == src_ch, ErrorCode::ShapeMismatch,
          "conv2d: input has " + std::to_string(x.channels()) + " channels, layer expects " +
              std::to_string(src_ch));
  const std::size_t H = x.height(), W = x.width(), k = w.side, r = k / 2;
  const std::size_t PW = W + 2 * r;
  ImageTensor out(dst_ch, H, W);
  if (!transposed && with_bias)
    for (std::size_t o = 0; o < dst_ch; ++o) std::fill(out.plane(o).begin(), out.plane(o).end(), w.bias[o]);

  std::vector<std::vector<double>> pads(src_ch);
  for (std::size_t s = 0; s < src_ch; ++s) pads[s] = detail::pad_plane(x.plane(s), H, W, r);
  // Row-major traversal keeps one output row hot across all taps.
  for (std::size_t y = 0; y < H; ++y)
    for (std::size_t d = 0; d < dst_ch; ++d) {
      double* drow = out.plane(d).data() + y * W;
      for (std::size_t s = 0; s < src_ch; ++s)
        for (std::size_t dy = 0; dy < k; ++dy)
          for (std::size_t dx = 0; dx < k; ++dx) {
            // forward: src offset (dy, dx); adjoint: (2r - dy, 2r - dx).
            const double wt = transposed ? w.tap(s, d, dy, dx) : w.tap(d, s, dy, dx);
            if (wt == 0.0) continue;
            const std::size_t oy = transposed ? 2 * r - dy : dy;
            const std::size_t ox = transposed ? 2 * r - dx : dx;
            const double* row = pads[s].data() + (y + oy) * PW + ox;
            for (std::size_t xx = 0; xx < W; ++xx) drow[xx] += wt * row[xx];
          }
    }
  return out;
}

/// Accumulates grad[o][i][q] += sum_p a[o](p) b[i](p + q - r) into `grad`.
/// For a forward layer a is the output gradient and b the layer input; for
/// a transposed use a is the layer input and b the output gradient.
inline void conv2d_weight_grad(const ImageTensor& a, const ImageTensor& b, ConvLayer& grad) {
  require(a.channels() == grad.out_channels && b.channels() == grad.in_channels &&
              a.height() == b.height() && a.width() == b.width(),
          ErrorCode::ShapeMismatch, "conv2d_weight_grad: shape mismatch");
  const std::size_t H = a.height(), W = a.width(), k = grad.side, r = k / 2, PW = W + 2 * r;
  std::vector<double> acc(k * k);
  for (std::size_t i = 0; i < grad.in_channels; ++i) {
    const auto pad = detail::pad_plane(b.plane(i), H, W, r);
    for (std::size_t o = 0; o < grad.out_channels; ++o) {
      const double* ga = a.plane(o).data();
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t y = 0; y < H; ++y) {
        const double* arow = ga + y * W;
        for (std::size_t dy = 0; dy < k; ++dy)
          for (std::size_t dx = 0; dx < k; ++dx) {
            const double* row = pad.data() + (y + dy) * PW + dx;
            double sum = 0.0;
            for (std::size_t xx = 0; xx < W; ++xx) sum += arow[xx] * row[xx];
            acc[dy * k + dx] += sum;
          }
      }
      for (std::size_t dy = 0; dy < k; ++dy)
        for (std::size_t dx = 0; dx < k; ++dx) grad.tap(o, i, dy, dx) += acc[dy * k + dx];
    }
  }
}

inline void conv2d_bias_grad(const ImageTensor& g, ConvLayer& grad) {
  for (std::size_t o = 0; o < grad.out_channels; ++o)
    for (double v : g.plane(o)) grad.bias[o] += v;
}

/// Per-channel negative slopes.
struct PReLU {
  std::vector<double> slope;

  PReLU() = default;
  explicit PReLU(std::size_t channels, double init = 0.25) : slope(channels, init) {}
};

inline ImageTensor prelu(const ImageTensor& x, const PReLU& a) {
  require(a.slope.size() == x.channels(), ErrorCode::ShapeMismatch, "prelu: channel mismatch");
  ImageTensor out = x;
  for (std::size_t c = 0; c < x.channels(); ++c)
    for (double& v : out.plane(c))
      if (v < 0.0) v *= a.slope[c];
  return out;
}

/// Returns the input gradient and accumulates slope gradients into `grad`.
inline ImageTensor prelu_backward(const ImageTensor& g, const ImageTensor& x, const PReLU& a, PReLU& grad) {
  ImageTensor gx = g;
  for (std::size_t c = 0; c < x.channels(); ++c) {
    auto xs = x.plane(c);
    auto gs = gx.plane(c);
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (xs[i] < 0.0) {
        acc += gs[i] * xs[i];
        gs[i] *= a.slope[c];
      }
    grad.slope[c] += acc;
  }
  return gx;
}

}  // namespace srwd
