#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "srwd/conv.hpp"
#include "srwd/error.hpp"
#include "srwd/numerics.hpp"
#include "srwd/random.hpp"
#include "srwd/tensor.hpp"

namespace srwd {

struct DenoiserConfig {
  std::size_t channels = 3;
  std::size_t features = 64;
  std::size_t units = 5;
  std::size_t head_side = 7;
  std::size_t unit_side = 3;

  static DenoiserConfig toy(std::size_t channels = 3, std::size_t features = 16) {
    return {channels, features, 2, 7, 3};
  }
  bool operator==(const DenoiserConfig&) const = default;
};

struct ResidualUnit {
  PReLU act_a;
  ConvLayer conv_a;
  PReLU act_b;
  ConvLayer conv_b;  // zero at init
};

/// Residual denoiser. The tail is the head applied as a transposed
/// convolution, so both share `head.taps`.
struct DenoiserWeights {
  DenoiserConfig config;
  ConvLayer head;
  std::vector<ResidualUnit> units;
  double log_gain = std::log(1e4);  // residual scale is var * exp(log_gain)

  double gain() const { return std::exp(log_gain); }

  DenoiserWeights zeros_like() const {
    DenoiserWeights z;
    z.config = config;
    z.head = head.zeros_like();
    for (auto& u : units)
      z.units.push_back({PReLU(u.act_a.slope.size(), 0.0), u.conv_a.zeros_like(),
                         PReLU(u.act_b.slope.size(), 0.0), u.conv_b.zeros_like()});
    z.log_gain = 0.0;
    return z;
  }

  void collect(const std::string& prefix, std::vector<ParamView>& out) {
    head.collect(prefix + ".head", out);
    for (std::size_t j = 0; j < units.size(); ++j) {
      const std::string p = prefix + ".unit" + std::to_string(j);
      out.push_back({p + ".act_a", {units[j].act_a.slope.size()}, units[j].act_a.slope});
      units[j].conv_a.collect(p + ".conv_a", out);
      out.push_back({p + ".act_b", {units[j].act_b.slope.size()}, units[j].act_b.slope});
      units[j].conv_b.collect(p + ".conv_b", out);
    }
    out.push_back({prefix + ".log_gain", {1}, std::span<double>(&log_gain, 1)});
  }
};

/// He-scaled random taps from `seed`; the last conv of every unit is zero,
/// which makes the network the identity map.
inline DenoiserWeights denoiser_init(const DenoiserConfig& cfg, std::uint64_t seed,
                                     std::uint64_t index = 0) {
  require(cfg.channels >= 1 && cfg.features >= 1, ErrorCode::BadShape, "empty denoiser config");
  Rng rng = make_stream(seed, index, stream::kInit);
  DenoiserWeights w;
  w.config = cfg;
  w.head = ConvLayer(cfg.features, cfg.channels, cfg.head_side);
  w.head.init_he(rng);
  for (std::size_t j = 0; j < cfg.units; ++j) {
    ResidualUnit u{PReLU(cfg.features), ConvLayer(cfg.features, cfg.features, cfg.unit_side),
                   PReLU(cfg.features), ConvLayer(cfg.features, cfg.features, cfg.unit_side)};
    u.conv_a.init_he(rng);
    w.units.push_back(std::move(u));
  }
  return w;
}

struct DenoiserCache {
  struct Unit {
    ImageTensor z, p1, c1, p2;
  };
  bool valid = false;
  ImageTensor x, h0, d, residual;
  std::vector<Unit> units;
  double variance = 0.0;
  double gain = 0.0;
};

/// Predicted noise residual
///   R(x) = head^T (U(head(x)) - head(x)),  U = RU_n o ... o RU_1,
///   RU(z) = z + conv_b(prelu_b(conv_a(prelu_a(z)))).
inline ImageTensor denoiser_residual(const ImageTensor& x, const DenoiserWeights& w,
                                     DenoiserCache* cache = nullptr) {
  require(x.channels() == w.config.channels, ErrorCode::ShapeMismatch,
          "denoiser expects " + std::to_string(w.config.channels) + " channels");
  ImageTensor h0 = conv2d(x, w.head);
  ImageTensor z = h0;
  std::vector<DenoiserCache::Unit> units;
  for (const auto& u : w.units) {
    DenoiserCache::Unit uc;
    uc.p1 = prelu(z, u.act_a);
    uc.c1 = conv2d(uc.p1, u.conv_a);
    uc.p2 = prelu(uc.c1, u.act_b);
    ImageTensor branch = conv2d(uc.p2, u.conv_b);
    if (cache) uc.z = z;
    z += branch;
    if (cache) units.push_back(std::move(uc));
  }
  z -= h0;
  ImageTensor r = conv2d(z, w.head, true);
  if (cache) {
    cache->valid = true;
    cache->x = x;
    cache->h0 = std::move(h0);
    cache->d = std::move(z);
    cache->residual = r;
    cache->units = std::move(units);
  }
  return r;
}

/// x_den = x - var * gain * R(x). `variance` is the prox strength; for a
/// plain denoiser call it is sigma^2.
inline ImageTensor denoise(const ImageTensor& x, double variance, const DenoiserWeights& w,
                           DenoiserCache* cache = nullptr) {
  require(variance >= 0.0, ErrorCode::BadFlag, "noise variance must be nonnegative");
  if (variance == 0.0 && !cache) return x;
  ImageTensor r = denoiser_residual(x, w, cache);
  const double scale = variance * w.gain();
  ImageTensor out = x;
  out.axpy(-scale, r);
  if (cache) {
    cache->variance = variance;
    cache->gain = w.gain();
  }
  return out;
}

inline ImageTensor denoiser_forward(const ImageTensor& x, double sigma, const DenoiserWeights& w,
                                    DenoiserCache* cache = nullptr) {
  require(sigma >= 0.0, ErrorCode::BadFlag, "sigma must be nonnegative");
  return denoise(x, sigma * sigma, w, cache);
}

/// Backpropagates an upstream gradient on R(x); returns the input gradient
/// and accumulates weight gradients (head taps collect both uses).
inline ImageTensor residual_backward(const ImageTensor& g_r, const DenoiserCache& cache,
                                     const DenoiserWeights& w, DenoiserWeights& grad) {
  require(cache.valid && g_r.same_shape(cache.residual), ErrorCode::StaleCache,
          "denoiser cache does not match this gradient");
  // tail: R = head^T d
  ImageTensor gd = conv2d(g_r, w.head, false, false);
  conv2d_weight_grad(cache.d, g_r, grad.head);

  ImageTensor gz = gd;
  for (std::size_t j = w.units.size(); j-- > 0;) {
    const auto& u = w.units[j];
    const auto& uc = cache.units[j];
    auto& gu = grad.units[j];
    conv2d_weight_grad(gz, uc.p2, gu.conv_b);
    conv2d_bias_grad(gz, gu.conv_b);
    ImageTensor g = conv2d(gz, u.conv_b, true);
    g = prelu_backward(g, uc.c1, u.act_b, gu.act_b);
    conv2d_weight_grad(g, uc.p1, gu.conv_a);
    conv2d_bias_grad(g, gu.conv_a);
    g = conv2d(g, u.conv_a, true);
    gz += prelu_backward(g, uc.z, u.act_a, gu.act_a);
  }
  gz -= gd;  // d = U(h0) - h0

  conv2d_weight_grad(gz, cache.x, grad.head);
  conv2d_bias_grad(gz, grad.head);
  return conv2d(gz, w.head, true);
}

struct DenoiserBackward {
  ImageTensor x;
  double variance = 0.0;
};

/// Reverse mode through denoise(); weight gradients accumulate into `grad`.
inline DenoiserBackward denoiser_backward(const ImageTensor& grad_out, const DenoiserCache& cache,
                                          const DenoiserWeights& w, DenoiserWeights& grad) {
  require(cache.valid && grad_out.same_shape(cache.x), ErrorCode::StaleCache,
          "denoiser cache does not match this gradient");
  const double scale = cache.variance * cache.gain;
  const double g_dot_r = dot(grad_out, cache.residual);
  DenoiserBackward out;
  out.variance = -cache.gain * g_dot_r;
  grad.log_gain += -scale * g_dot_r;
  out.x = grad_out;
  if (scale != 0.0) {
    ImageTensor g_r = grad_out;
    g_r *= -scale;
    out.x += residual_backward(g_r, cache, w, grad);
  }
  return out;
}

/// Reference proximal step: soft-thresholds forward differences by tau along
/// rows, then along columns, re-integrating each line around its original
/// mean, and finally clamps to the image's declared range.
inline ImageTensor analytic_prox(const ImageTensor& x, double tau) {
  require(tau >= 0.0, ErrorCode::BadFlag, "tau must be nonnegative");
  ImageTensor out = x;
  if (tau > 0.0) {
    std::vector<double> line, shrunk;
    auto pass = [&](std::size_t n, auto&& at) {
      line.resize(n);
      shrunk.resize(n);
      for (std::size_t i = 0; i < n; ++i) line[i] = at(i);
      double mean = 0.0;
      for (double v : line) mean += v / double(n);
      shrunk[0] = 0.0;
      double smean = 0.0;
      for (std::size_t i = 1; i < n; ++i) {
        const double d = line[i] - line[i - 1];
        const double mag = std::max(std::abs(d) - tau, 0.0);
        shrunk[i] = shrunk[i - 1] + std::copysign(mag, d);
      }
      for (double v : shrunk) smean += v / double(n);
      for (std::size_t i = 0; i < n; ++i) at(i) = shrunk[i] - smean + mean;
    };
    const std::size_t H = x.height(), W = x.width();
    for (std::size_t c = 0; c < x.channels(); ++c) {
      for (std::size_t y = 0; y < H; ++y) pass(W, [&](std::size_t i) -> double& { return out(c, y, i); });
      for (std::size_t xx = 0; xx < W; ++xx) pass(H, [&](std::size_t i) -> double& { return out(c, i, xx); });
    }
  }
  return clamp_project(out, x.range().lo, x.range().hi);
}

}  // namespace srwd
