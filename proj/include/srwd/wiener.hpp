#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "srwd/error.hpp"
#include "srwd/fft.hpp"
#include "srwd/numerics.hpp"
#include "srwd/tensor.hpp"

namespace srwd {

/// Trainable parameters of the Wiener deconvolution layer. The trade-off
/// weight is alpha = exp(log_alpha), so it stays positive under any update.
struct WienerParams {
  FilterBank bank;
  double log_alpha = std::log(0.01);
  // Optional noise-level modulation alpha_eff = alpha * sigma^2 * exp(log_sigma_gain).
  // The default gain makes alpha_eff == alpha at sigma = 1%.
  bool sigma_modulation = false;
  double log_sigma_gain = std::log(1e4);

  double alpha() const { return std::exp(log_alpha); }

  double effective_alpha(double sigma) const {
    return sigma_modulation ? alpha() * sigma * sigma * std::exp(log_sigma_gain) : alpha();
  }
};

inline WienerParams wiener_init(std::size_t n = 5, std::size_t d = 24, double alpha0 = 0.01) {
  require(alpha0 >= 1e-4 && alpha0 <= 1e-2, ErrorCode::BadAlpha,
          "initial alpha must lie in [1e-4, 1e-2]");
  WienerParams p;
  p.bank = dct_filter_bank(n);
  require(d >= 1 && d <= p.bank.count(), ErrorCode::BadSize,
          "bank size must be in [1, n^2 - 1]");
  p.bank.filters.resize(d);
  p.log_alpha = std::log(alpha0);
  return p;
}

/// Spectra kept from the forward pass.
struct WienerCache {
  bool valid = false;
  std::size_t channels = 0, height = 0, width = 0;
  double alpha = 0.0;
  bool sigma_modulation = false;
  std::size_t bank_side = 0;
  Spectrum kernel_otf;
  std::vector<Spectrum> bank_otf;
  std::vector<double> reg_power;    // sum_i |G_i|^2
  std::vector<double> denominator;  // |K|^2 + alpha * reg_power
  std::vector<Spectrum> solution;   // X per channel
};

struct WienerGrads {
  ImageTensor y;
  std::vector<std::vector<double>> bank;  // per filter, side*side taps
  double log_alpha = 0.0;
  double log_sigma_gain = 0.0;
};

/// Regularized deconvolution
///   X = conj(K) Y / (|K|^2 + alpha * sum_i |G_i|^2)
/// per channel, i.e. x = (K'K + alpha sum G_i'G_i)^-1 K'y under periodic
/// boundaries.
inline ImageTensor wiener_forward(const ImageTensor& y, const Kernel& k, const WienerParams& params,
                                  WienerCache* cache = nullptr, double sigma = 0.01) {
  const std::size_t H = y.height(), W = y.width(), N = H * W;
  require(params.bank.side <= H && params.bank.side <= W, ErrorCode::KernelTooLarge,
          "regularization filters exceed the image");
  const double alpha = params.effective_alpha(sigma);

  Spectrum K = psf_to_otf(k, H, W);
  std::vector<Spectrum> G;
  G.reserve(params.bank.count());
  std::vector<double> P(N, 0.0), D(N);
  for (const auto& g : params.bank.filters) {
    G.push_back(psf_to_otf(g, H, W));
    for (std::size_t i = 0; i < N; ++i) P[i] += std::norm(G.back().bins[i]);
  }
  for (std::size_t i = 0; i < N; ++i) {
    D[i] = std::norm(K.bins[i]) + alpha * P[i];
    require(D[i] >= 1e-15, ErrorCode::SingularDenominator,
            "Wiener denominator vanishes at a frequency bin");
  }

  ImageTensor x(y.channels(), H, W);
  std::vector<Spectrum> X(y.channels());
  for (std::size_t c = 0; c < y.channels(); ++c) {
    Spectrum Y = fft2(y.plane(c), H, W);
    for (std::size_t i = 0; i < N; ++i) Y.bins[i] = std::conj(K.bins[i]) * Y.bins[i] / D[i];
    auto plane = ifft2_real(Y);
    std::copy(plane.begin(), plane.end(), x.plane(c).begin());
    X[c] = std::move(Y);
  }

  if (cache) {
    cache->valid = true;
    cache->channels = y.channels();
    cache->height = H;
    cache->width = W;
    cache->alpha = alpha;
    cache->sigma_modulation = params.sigma_modulation;
    cache->bank_side = params.bank.side;
    cache->kernel_otf = std::move(K);
    cache->bank_otf = std::move(G);
    cache->reg_power = std::move(P);
    cache->denominator = std::move(D);
    cache->solution = std::move(X);
  }
  return x;
}

/// Reverse-mode gradients of <grad_x, x> with respect to the observation,
/// each bank tap and log alpha.
inline WienerGrads wiener_backward(const ImageTensor& grad_x, const WienerCache& cache) {
  require(cache.valid && grad_x.channels() == cache.channels && grad_x.height() == cache.height &&
              grad_x.width() == cache.width,
          ErrorCode::StaleCache, "Wiener cache does not match this gradient");
  const std::size_t H = cache.height, W = cache.width, N = H * W;

  WienerGrads out;
  out.y = ImageTensor(cache.channels, H, W);
  // dL/dD per bin, summed over channels.
  std::vector<double> dD(N, 0.0);
  for (std::size_t c = 0; c < cache.channels; ++c) {
    Spectrum GX = fft2(grad_x.plane(c), H, W);
    Spectrum GY(H, W);
    for (std::size_t i = 0; i < N; ++i) {
      GY.bins[i] = cache.kernel_otf.bins[i] * GX.bins[i] / cache.denominator[i];
      dD[i] -= (std::conj(GX.bins[i]) * cache.solution[c].bins[i]).real() /
               (double(N) * cache.denominator[i]);
    }
    auto plane = ifft2_real(GY);
    std::copy(plane.begin(), plane.end(), out.y.plane(c).begin());
  }

  double d_alpha = 0.0;
  for (std::size_t i = 0; i < N; ++i) d_alpha += dD[i] * cache.reg_power[i];
  out.log_alpha = cache.alpha * d_alpha;
  out.log_sigma_gain = cache.sigma_modulation ? cache.alpha * d_alpha : 0.0;

  // d|G(w)|^2 / dg(p) = 2 Re(conj(G(w)) e^{-i w p}); summing against dD is a
  // forward DFT of dD * conj(G).
  const std::size_t n = cache.bank_side, r = n / 2;
  for (const Spectrum& G : cache.bank_otf) {
    Spectrum T(H, W);
    for (std::size_t i = 0; i < N; ++i) T.bins[i] = dD[i] * std::conj(G.bins[i]);
    Spectrum F = fft2(T);
    std::vector<double> taps(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        taps[i * n + j] = 2.0 * cache.alpha * F((i + H - r) % H, (j + W - r) % W).real();
    out.bank.push_back(std::move(taps));
  }
  return out;
}

}  // namespace srwd
