#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "srwd/error.hpp"
#include "srwd/image_io.hpp"
#include "srwd/numerics.hpp"
#include "srwd/random.hpp"
#include "srwd/tensor.hpp"

namespace srwd {

/// Kernel sizes used for synthesized motion blur (25 is absent from the
/// published protocol and is left out here too).
inline constexpr std::array<std::size_t, 10> kMotionKernelSizes = {11, 13, 15, 17, 19,
                                                                    21, 23, 27, 29, 31};

struct MotionParams {
  std::optional<std::size_t> steps;  // default: 2000 * side / 31
  double inertia = 0.9;
  double shake_prob = 0.02;

  std::size_t steps_for(std::size_t side) const {
    return steps ? *steps : static_cast<std::size_t>(2000.0 * double(side) / 31.0);
  }
};

/// Random camera-shake kernel. A particle starts at rest at the origin;
/// each step blends its velocity with a Gaussian kick
/// (v <- inertia*v + (1-inertia)*g) and, with probability shake_prob, flips
/// and doubles it. The centered trajectory is scaled to span the grid,
/// splatted bilinearly and normalized.
inline BlurKernel synth_motion_kernel(std::size_t side, std::uint64_t seed,
                                      const MotionParams& params = {}) {
  require(side % 2 == 1 && side >= 11 && side <= 31, ErrorCode::BadSide,
          "motion kernel side must be odd in [11, 31]");
  require(params.inertia >= 0.0 && params.inertia <= 1.0 && params.shake_prob >= 0.0 &&
              params.shake_prob <= 1.0,
          ErrorCode::BadFlag, "inertia and shake probability must lie in [0,1]");
  const std::size_t steps = params.steps_for(side);

  Rng rng = make_stream(seed, side, stream::kKernel);
  std::normal_distribution<double> kick(0.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  std::vector<std::array<double, 2>> path{{0.0, 0.0}};
  std::array<double, 2> pos{0.0, 0.0}, vel{0.0, 0.0};
  for (std::size_t t = 0; t < steps; ++t) {
    for (int d = 0; d < 2; ++d) vel[d] = params.inertia * vel[d] + (1.0 - params.inertia) * kick(rng);
    if (coin(rng) < params.shake_prob)
      for (double& v : vel) v *= -2.0;
    for (int d = 0; d < 2; ++d) pos[d] += vel[d];
    path.push_back(pos);
  }

  std::array<double, 2> mean{0.0, 0.0};
  for (auto& p : path)
    for (int d = 0; d < 2; ++d) mean[d] += p[d] / double(path.size());
  double extent = 0.0;
  for (auto& p : path)
    for (int d = 0; d < 2; ++d) {
      p[d] -= mean[d];
      extent = std::max(extent, std::abs(p[d]));
    }
  const double r = double(side / 2);
  const double fit = extent > 1e-12 ? (r - 1.0) / extent : 0.0;

  std::vector<double> taps(side * side, 0.0);
  for (auto& p : path) {
    const double py = p[0] * fit + r, px = p[1] * fit + r;
    const auto y0 = static_cast<std::size_t>(std::floor(py));
    const auto x0 = static_cast<std::size_t>(std::floor(px));
    const double fy = py - double(y0), fx = px - double(x0);
    taps[y0 * side + x0] += (1 - fy) * (1 - fx);
    if (fx > 0) taps[y0 * side + x0 + 1] += (1 - fy) * fx;
    if (fy > 0) taps[(y0 + 1) * side + x0] += fy * (1 - fx);
    if (fx > 0 && fy > 0) taps[(y0 + 1) * side + x0 + 1] += fy * fx;
  }
  double total = 0.0;
  for (double v : taps) total += v;
  for (double& v : taps) v /= total;
  return BlurKernel(side, std::move(taps));
}

/// Uniform draw from kMotionKernelSizes.
inline std::size_t draw_kernel_size(Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, kMotionKernelSizes.size() - 1);
  return kMotionKernelSizes[pick(rng)];
}

/// Adds i.i.d. N(0, sigma^2) noise. No clipping.
inline ImageTensor add_awgn(const ImageTensor& image, double sigma, std::uint64_t seed) {
  require(sigma >= 0.0, ErrorCode::BadFlag, "sigma must be nonnegative");
  ImageTensor out = image;
  if (sigma == 0.0) return out;
  Rng rng = make_stream(seed, 0, stream::kNoise);
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& v : out.data()) v += noise(rng);
  return out;
}

enum class DegradationVariant {
  BicubicOnly,   // y = x down s
  BlurThenDown,  // y = (k * x) down s + n
  DownThenBlur,  // y = k * (x down s) + n
};

inline std::string_view to_string(DegradationVariant v) {
  switch (v) {
    case DegradationVariant::BicubicOnly: return "eq1";
    case DegradationVariant::BlurThenDown: return "eq2";
    case DegradationVariant::DownThenBlur: return "eq3";
  }
  return "eq3";
}

inline DegradationVariant parse_variant(std::string_view s) {
  if (s == "eq1") return DegradationVariant::BicubicOnly;
  if (s == "eq2") return DegradationVariant::BlurThenDown;
  if (s == "eq3") return DegradationVariant::DownThenBlur;
  throw Error(ErrorCode::BadFlag, "unknown degradation variant '" + std::string(s) + "'");
}

struct DegradationSpec {
  std::size_t scale = 2;
  double sigma = 0.0;  // internal [0,1] units
  DegradationVariant variant = DegradationVariant::DownThenBlur;
  std::uint64_t seed = 0;
};

/// Synthesizes the LR observation. Values are not clipped; file writers do
/// that.
inline ImageTensor degrade(const ImageTensor& x, const DegradationSpec& spec, const BlurKernel& k) {
  check_scale(spec.scale);
  require(spec.sigma >= 0.0, ErrorCode::BadFlag, "sigma must be nonnegative");
  const auto down = [&](const ImageTensor& img) {
    return bicubic_resize(img, spec.scale, ResizeDirection::Down, true);
  };
  switch (spec.variant) {
    case DegradationVariant::BicubicOnly:
      return down(x);
    case DegradationVariant::BlurThenDown:
      return add_awgn(down(circ_conv(x, k)), spec.sigma, spec.seed);
    case DegradationVariant::DownThenBlur: {
      require(x.height() % spec.scale == 0 && x.width() % spec.scale == 0,
              ErrorCode::NonDivisibleDims, "HR dims not divisible by scale");
      require(k.side() <= x.height() / spec.scale && k.side() <= x.width() / spec.scale,
              ErrorCode::KernelTooLarge,
              "kernel side " + std::to_string(k.side()) + " exceeds the LR grid");
      return add_awgn(circ_conv(down(x), k), spec.sigma, spec.seed);
    }
  }
  return x;
}

// ---------------------------------------------------------------------------
// Kernel files
// ---------------------------------------------------------------------------

/// Text format: first line the side, then `side` lines of `side`
/// space-separated decimals.
inline void save_kernel(const std::filesystem::path& path, const Kernel& k) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  require(bool(out), ErrorCode::IoError, "cannot write " + path.string());
  out << k.side() << '\n' << std::setprecision(17);
  for (std::size_t y = 0; y < k.side(); ++y) {
    for (std::size_t x = 0; x < k.side(); ++x) out << (x ? " " : "") << k(y, x);
    out << '\n';
  }
  require(bool(out), ErrorCode::IoError, "failed writing " + path.string());
}

inline Kernel load_kernel(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(bool(in), ErrorCode::IoError, "cannot read " + path.string());
  std::size_t side = 0;
  require(bool(in >> side) && side % 2 == 1, ErrorCode::CorruptFile,
          path.string() + ": bad kernel side");
  std::vector<double> taps(side * side);
  for (double& v : taps) require(bool(in >> v), ErrorCode::CorruptFile, path.string() + ": truncated");
  return Kernel(side, std::move(taps));
}

/// Grayscale preview scaled so the largest tap is white.
inline void save_kernel_png(const std::filesystem::path& path, const Kernel& k) {
  double mx = 0.0;
  for (double v : k.taps()) mx = std::max(mx, v);
  ImageTensor img(1, k.side(), k.side());
  for (std::size_t i = 0; i < k.taps().size(); ++i) img.data()[i] = mx > 0 ? k.taps()[i] / mx : 0.0;
  write_png(path, img, 8);
}

}  // namespace srwd
