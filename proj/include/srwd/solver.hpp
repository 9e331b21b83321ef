#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "srwd/conv.hpp"
#include "srwd/error.hpp"
#include "srwd/numerics.hpp"
#include "srwd/prior.hpp"
#include "srwd/random.hpp"
#include "srwd/tensor.hpp"
#include "srwd/wiener.hpp"

namespace srwd {

/// The degradation A x = k * (x down s) for one HR grid, with its exact
/// adjoint A^T r = (k corr r) up^T.
class DataOperator {
 public:
  DataOperator() = default;
  DataOperator(std::size_t hr_h, std::size_t hr_w, std::size_t s, const Kernel& k)
      : down_(hr_h, hr_w, s, ResizeDirection::Down, true), blur_(k, hr_h / s, hr_w / s) {}

  std::size_t scale() const { return down_.scale(); }
  std::size_t hr_height() const { return down_.in_height(); }
  std::size_t hr_width() const { return down_.in_width(); }
  std::size_t lr_height() const { return down_.out_height(); }
  std::size_t lr_width() const { return down_.out_width(); }

  ImageTensor forward(const ImageTensor& x) const { return blur_.apply(down_.forward(x)); }
  ImageTensor adjoint(const ImageTensor& r) const { return down_.adjoint(blur_.apply(r, true)); }
  /// D^T only (no blur), used to lift LR images onto the HR grid.
  ImageTensor lift(const ImageTensor& r) const { return down_.adjoint(r); }
  ImageTensor down(const ImageTensor& x) const { return down_.forward(x); }

  /// A^T (A x - y), the data gradient without the 1/sigma^2 factor.
  ImageTensor normal_residual(const ImageTensor& x, const ImageTensor& y) const {
    ImageTensor r = forward(x);
    require(r.same_shape(y), ErrorCode::ShapeMismatch, "observation does not match the HR grid");
    r -= y;
    return adjoint(r);
  }

 private:
  Resampler down_;
  CircularConvolver blur_;
};

/// grad of f(x) = ||y - k * (x down s)||^2 / (2 sigma^2).
inline ImageTensor data_grad(const ImageTensor& x, const ImageTensor& y, const Kernel& k, std::size_t s,
                             double sigma) {
  require(sigma > 0.0, ErrorCode::BadFlag, "sigma must be positive");
  require(x.channels() == y.channels() && x.height() == s * y.height() && x.width() == s * y.width(),
          ErrorCode::ShapeMismatch, "HR estimate and observation shapes are inconsistent");
  DataOperator op(x.height(), x.width(), s, k);
  ImageTensor g = op.normal_residual(x, y);
  g *= 1.0 / (sigma * sigma);
  return g;
}

inline double data_objective(const DataOperator& op, const ImageTensor& x, const ImageTensor& y,
                             double sigma) {
  ImageTensor r = op.forward(x);
  r -= y;
  return squared_norm(r) / (2.0 * sigma * sigma);
}

/// Largest eigenvalue of A^T A by power iteration.
inline double operator_norm_sq(const DataOperator& op, std::size_t channels, std::size_t iterations = 200,
                               std::uint64_t seed = 0) {
  Rng rng = make_stream(seed, 0, stream::kInit);
  std::normal_distribution<double> n(0.0, 1.0);
  ImageTensor v(channels, op.hr_height(), op.hr_width());
  for (double& e : v.data()) e = n(rng);
  double lambda = 0.0;
  for (std::size_t i = 0; i < iterations; ++i) {
    v *= 1.0 / std::sqrt(squared_norm(v));
    ImageTensor w = op.adjoint(op.forward(v));
    lambda = dot(v, w);
    v = std::move(w);
  }
  return lambda;
}

// ---------------------------------------------------------------------------
// Priors used inside the PGM step
// ---------------------------------------------------------------------------

/// Psi = 0, prox = identity (the clamp after the prox still applies).
struct IdentityPrior {
  ImageTensor residual(const ImageTensor& x) const { return ImageTensor(x.channels(), x.height(), x.width()); }
  ImageTensor prox(const ImageTensor& z, double) const { return z; }
};
using ClampPrior = IdentityPrior;

struct AnalyticPrior {
  double tau_per_variance = 1e3;
  ImageTensor residual(const ImageTensor& x) const { return ImageTensor(x.channels(), x.height(), x.width()); }
  ImageTensor prox(const ImageTensor& z, double variance) const {
    ImageTensor zz = z;
    zz.set_range({0.0, 1.0});
    return analytic_prox(zz, tau_per_variance * variance);
  }
};

struct LearnedPrior {
  const DenoiserWeights* weights = nullptr;
  DenoiserCache* residual_cache = nullptr;
  DenoiserCache* prox_cache = nullptr;

  ImageTensor residual(const ImageTensor& x) const { return denoiser_residual(x, *weights, residual_cache); }
  ImageTensor prox(const ImageTensor& z, double variance) const {
    return denoise(z, variance, *weights, prox_cache);
  }
};

struct IterationCache {
  ImageTensor x, normal, psi, u;  // u is the prox output before clamping
  DenoiserCache psi_cache, prox_cache;
  double gamma = 0.0, lambda = 0.0;
  std::size_t param_index = 0;
};

/// One proximal-gradient step on the HR grid:
///   z = x - gamma A^T(Ax - y) - lambda gamma Psi(x)
///   x+ = clamp(prox(z; gamma sigma^2), 0, 1)
/// The data step is gamma sigma^2 times the gradient of f, so the prox
/// strength and the gradient step agree.
template <class Prior>
ImageTensor pgm_iteration(const ImageTensor& x, const ImageTensor& y, const DataOperator& op, double sigma,
                          double gamma, double lambda, const Prior& prior, IterationCache* cache = nullptr) {
  ImageTensor normal = op.normal_residual(x, y);
  ImageTensor psi = lambda != 0.0 || cache ? prior.residual(x) : ImageTensor(x.channels(), x.height(), x.width());
  ImageTensor z = x;
  z.axpy(-gamma, normal);
  z.axpy(-lambda * gamma, psi);
  ImageTensor u = prior.prox(z, gamma * sigma * sigma);
  ImageTensor next = clamp_project(u, 0.0, 1.0);
  if (cache) {
    cache->x = x;
    cache->normal = std::move(normal);
    cache->psi = std::move(psi);
    cache->u = std::move(u);
    cache->gamma = gamma;
    cache->lambda = lambda;
  }
  return next;
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

/// Per-iteration step sizes (log domain) and trade-offs.
struct StageParams {
  std::vector<double> log_gamma;
  std::vector<double> lambda;
  std::size_t stages = 1;

  std::size_t iterations() const { return log_gamma.size(); }
  double gamma(std::size_t t) const { return std::exp(log_gamma[t]); }
};

/// Transposed 3x3 conv C -> s^2 C followed by a pixel shuffle. The layer is
/// stored with out_channels = C and in_channels = s^2 C; its bias is unused.
struct UpscalerWeights {
  std::size_t scale = 2;
  ConvLayer pre_conv;
};

inline ImageTensor upscale_head(const ImageTensor& x, const UpscalerWeights& w) {
  require(w.pre_conv.out_channels == x.channels() &&
              w.pre_conv.in_channels == w.scale * w.scale * x.channels(),
          ErrorCode::ShapeMismatch, "upscaler channels do not match input");
  return pixel_shuffle(conv2d(x, w.pre_conv, true), w.scale);
}

struct ModelConfig {
  std::size_t scale = 2;
  std::size_t channels = 3;
  DenoiserConfig denoiser{};
  std::size_t iterations = 4;
  std::size_t stages = 1;
  bool shared_denoiser = true;
  std::size_t wiener_side = 5;
  std::size_t wiener_filters = 24;
  double alpha0 = 0.01;
  double gamma0 = 0.1;
  double lambda0 = 0.01;
  bool sigma_modulation = true;  // Wiener weight alpha * sigma^2 * gain

  static ModelConfig toy(std::size_t scale = 2, std::size_t channels = 3) {
    ModelConfig c;
    c.scale = scale;
    c.channels = channels;
    c.denoiser = DenoiserConfig::toy(channels, 16);
    return c;
  }
};

struct SrwdModel {
  ModelConfig config;
  WienerParams wiener;
  std::vector<DenoiserWeights> denoisers;  // 1 if shared, else one per iteration
  StageParams stage;
  UpscalerWeights upscaler;

  std::size_t scale() const { return config.scale; }
  const DenoiserWeights& denoiser_for(std::size_t t) const { return denoisers[denoisers.size() == 1 ? 0 : t]; }
  DenoiserWeights& denoiser_for(std::size_t t) { return denoisers[denoisers.size() == 1 ? 0 : t]; }

  SrwdModel zeros_like() const {
    SrwdModel z = *this;
    for (auto& f : z.wiener.bank.filters) std::fill(f.taps().begin(), f.taps().end(), 0.0);
    z.wiener.log_alpha = 0.0;
    z.wiener.log_sigma_gain = 0.0;
    for (auto& d : z.denoisers) d = d.zeros_like();
    std::fill(z.stage.log_gamma.begin(), z.stage.log_gamma.end(), 0.0);
    std::fill(z.stage.lambda.begin(), z.stage.lambda.end(), 0.0);
    z.upscaler.pre_conv = z.upscaler.pre_conv.zeros_like();
    return z;
  }

  /// Every trainable array in a fixed order.
  std::vector<ParamView> params() {
    std::vector<ParamView> out;
    const std::size_t n = wiener.bank.side;
    for (std::size_t i = 0; i < wiener.bank.count(); ++i)
      out.push_back({"wiener.filter" + std::to_string(i), {n, n}, wiener.bank.filters[i].taps()});
    out.push_back({"wiener.log_alpha", {1}, std::span<double>(&wiener.log_alpha, 1)});
    if (wiener.sigma_modulation)
      out.push_back({"wiener.log_sigma_gain", {1}, std::span<double>(&wiener.log_sigma_gain, 1)});
    for (std::size_t i = 0; i < denoisers.size(); ++i) denoisers[i].collect("denoiser" + std::to_string(i), out);
    out.push_back({"stage.log_gamma", {stage.log_gamma.size()}, stage.log_gamma});
    out.push_back({"stage.lambda", {stage.lambda.size()}, stage.lambda});
    upscaler.pre_conv.collect("upscaler", out, false);
    return out;
  }
};

inline SrwdModel model_init(const ModelConfig& cfg, std::uint64_t seed) {
  check_scale(cfg.scale);
  require(cfg.iterations >= 1 && cfg.stages >= 1, ErrorCode::BadFlag, "need at least one iteration");
  require(cfg.gamma0 > 0.0 && cfg.lambda0 >= 0.0, ErrorCode::BadFlag, "gamma must be > 0 and lambda >= 0");
  require(cfg.denoiser.channels == cfg.channels, ErrorCode::ShapeMismatch, "denoiser channel mismatch");
  SrwdModel m;
  m.config = cfg;
  m.wiener = wiener_init(cfg.wiener_side, cfg.wiener_filters, cfg.alpha0);
  m.wiener.sigma_modulation = cfg.sigma_modulation;
  const std::size_t copies = cfg.shared_denoiser ? 1 : cfg.iterations;
  for (std::size_t i = 0; i < copies; ++i) m.denoisers.push_back(denoiser_init(cfg.denoiser, seed, i));
  m.stage.log_gamma.assign(cfg.iterations, std::log(cfg.gamma0));
  m.stage.lambda.assign(cfg.iterations, cfg.lambda0);
  m.stage.stages = cfg.stages;
  m.upscaler.scale = cfg.scale;
  m.upscaler.pre_conv = ConvLayer(cfg.channels, cfg.scale * cfg.scale * cfg.channels, 3);
  return m;
}

struct ForwardCache {
  bool valid = false;
  DataOperator op;
  double sigma = 0.0;
  WienerCache wiener;
  ImageTensor x0, init_pre, out_pre;
  std::vector<IterationCache> iterations;
};

/// LR observation -> HR estimate:
///   x0 = Wiener(y); x = clamp(s^2 D^T x0); T PGM steps (repeated S times);
///   out = clamp(x_T + upscale_head(x0)).
inline ImageTensor srwdnet_forward(const ImageTensor& y, const Kernel& k, double sigma, const SrwdModel& m,
                                   ForwardCache* cache = nullptr) {
  require(y.channels() == m.config.channels, ErrorCode::ShapeMismatch,
          "model expects " + std::to_string(m.config.channels) + " channels");
  require(sigma > 0.0, ErrorCode::BadFlag, "sigma must be positive");
  require(k.side() <= y.height() && k.side() <= y.width(), ErrorCode::KernelTooLarge,
          "kernel side " + std::to_string(k.side()) + " exceeds the LR image");
  const std::size_t s = m.scale();
  DataOperator op(y.height() * s, y.width() * s, s, k);

  ImageTensor x0 = wiener_forward(y, k, m.wiener, cache ? &cache->wiener : nullptr, sigma);
  ImageTensor init = op.lift(x0);
  init *= double(s * s);
  ImageTensor x = clamp_project(init, 0.0, 1.0);

  const std::size_t T = m.stage.iterations();
  if (cache) cache->iterations.assign(T * m.stage.stages, {});
  for (std::size_t rep = 0; rep < m.stage.stages; ++rep)
    for (std::size_t t = 0; t < T; ++t) {
      IterationCache* ic = cache ? &cache->iterations[rep * T + t] : nullptr;
      LearnedPrior prior{&m.denoiser_for(t), ic ? &ic->psi_cache : nullptr, ic ? &ic->prox_cache : nullptr};
      x = pgm_iteration(x, y, op, sigma, m.stage.gamma(t), m.stage.lambda[t], prior, ic);
      if (ic) ic->param_index = t;
    }

  ImageTensor out = x;
  out += upscale_head(x0, m.upscaler);
  ImageTensor result = clamp_project(out, 0.0, 1.0);
  if (cache) {
    cache->valid = true;
    cache->op = std::move(op);
    cache->sigma = sigma;
    cache->x0 = std::move(x0);
    cache->init_pre = std::move(init);
    cache->out_pre = std::move(out);
  }
  return result;
}

namespace detail {

inline void mask_clamped(ImageTensor& g, const ImageTensor& pre, double lo = 0.0, double hi = 1.0) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = pre.data()[i];
    if (!(v > lo && v < hi)) g.data()[i] = 0.0;
  }
}

}  // namespace detail

/// Reverse mode through one cached PGM step with a learned prior. Returns
/// the gradient with respect to the step input.
inline ImageTensor pgm_backward(const ImageTensor& grad_next, const IterationCache& ic, const DataOperator& op,
                                double sigma, const DenoiserWeights& w, DenoiserWeights& gw, double& g_log_gamma,
                                double& g_lambda) {
  ImageTensor gu = grad_next;
  detail::mask_clamped(gu, ic.u);
  DenoiserBackward prox = denoiser_backward(gu, ic.prox_cache, w, gw);
  const ImageTensor& gz = prox.x;

  const double g_dot_normal = dot(gz, ic.normal), g_dot_psi = dot(gz, ic.psi);
  const double d_gamma = -g_dot_normal - ic.lambda * g_dot_psi + prox.variance * sigma * sigma;
  g_log_gamma += ic.gamma * d_gamma;
  g_lambda += -ic.gamma * g_dot_psi;

  // z = x - gamma A^T A x + const - lambda gamma Psi(x)
  ImageTensor gx = gz;
  gx.axpy(-ic.gamma, op.adjoint(op.forward(gz)));
  if (ic.lambda != 0.0) {
    ImageTensor g_psi = gz;
    g_psi *= -ic.lambda * ic.gamma;
    gx += residual_backward(g_psi, ic.psi_cache, w, gw);
  }
  return gx;
}

/// Gradients of <grad_out, srwdnet_forward(...)> for every trainable array,
/// laid out like the model itself.
inline SrwdModel srwdnet_backward(const ImageTensor& grad_out, const ForwardCache& cache, const SrwdModel& m) {
  require(cache.valid && grad_out.same_shape(cache.out_pre), ErrorCode::StaleCache,
          "forward cache does not match this gradient");
  SrwdModel g = m.zeros_like();
  const std::size_t s = m.scale();

  ImageTensor gpre = grad_out;
  detail::mask_clamped(gpre, cache.out_pre);

  // head: pixel_shuffle(W^T x0)
  ImageTensor g_conv = pixel_shuffle(gpre, s, true);
  conv2d_weight_grad(cache.x0, g_conv, g.upscaler.pre_conv);
  ImageTensor gx0 = conv2d(g_conv, m.upscaler.pre_conv, false, false);

  ImageTensor gx = gpre;
  for (std::size_t i = cache.iterations.size(); i-- > 0;) {
    const auto& ic = cache.iterations[i];
    const std::size_t t = ic.param_index;
    gx = pgm_backward(gx, ic, cache.op, cache.sigma, m.denoiser_for(t), g.denoiser_for(t), g.stage.log_gamma[t],
                      g.stage.lambda[t]);
  }

  detail::mask_clamped(gx, cache.init_pre);
  gx *= double(s * s);
  gx0 += cache.op.down(gx);

  WienerGrads wg = wiener_backward(gx0, cache.wiener);
  for (std::size_t i = 0; i < wg.bank.size(); ++i) g.wiener.bank.filters[i].taps() = wg.bank[i];
  g.wiener.log_alpha = wg.log_alpha;
  g.wiener.log_sigma_gain = wg.log_sigma_gain;
  return g;
}

}  // namespace srwd
