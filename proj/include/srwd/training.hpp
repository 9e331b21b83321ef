#pragma once

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "json.hpp"
#include "srwd/dataset.hpp"
#include "srwd/degradation.hpp"
#include "srwd/image_io.hpp"
#include "srwd/random.hpp"
#include "srwd/solver.hpp"

namespace srwd {

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

enum class LossNorm { Mean, Sum };

inline std::string_view to_string(LossNorm n) { return n == LossNorm::Mean ? "mean" : "sum"; }

inline LossNorm parse_loss_norm(std::string_view s) {
  if (s == "mean") return LossNorm::Mean;
  if (s == "sum") return LossNorm::Sum;
  throw Error(ErrorCode::BadFlag, "unknown loss normalization '" + std::string(s) + "'");
}

struct LossReport {
  double content = 0.0;
  double gradient = 0.0;
  double total = 0.0;
};

namespace detail {

inline double loss_scale(const ImageTensor& a, LossNorm norm) {
  return norm == LossNorm::Mean ? 1.0 / double(a.size()) : 1.0;
}

}  // namespace detail

/// ||a - b||^2, divided by the element count for LossNorm::Mean.
inline double loss_content(const ImageTensor& a, const ImageTensor& b, LossNorm norm = LossNorm::Mean) {
  require(a.same_shape(b), ErrorCode::ShapeMismatch, "loss_content: shapes differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    acc += d * d;
  }
  return acc * detail::loss_scale(a, norm);
}

/// ||grad_v a - grad_v b||^2 + ||grad_h a - grad_h b||^2 with circular
/// forward differences.
inline double loss_gradient(const ImageTensor& a, const ImageTensor& b, LossNorm norm = LossNorm::Mean) {
  require(a.same_shape(b), ErrorCode::ShapeMismatch, "loss_gradient: shapes differ");
  const std::size_t H = a.height(), W = a.width();
  double acc = 0.0;
  for (std::size_t c = 0; c < a.channels(); ++c)
    for (std::size_t y = 0; y < H; ++y)
      for (std::size_t x = 0; x < W; ++x) {
        const double e = a(c, y, x) - b(c, y, x);
        const double dv = a(c, (y + 1) % H, x) - b(c, (y + 1) % H, x) - e;
        const double dh = a(c, y, (x + 1) % W) - b(c, y, (x + 1) % W) - e;
        acc += dv * dv + dh * dh;
      }
  return acc * detail::loss_scale(a, norm);
}

/// Both losses and the gradient of their sum with respect to `a`.
inline LossReport loss_with_grad(const ImageTensor& a, const ImageTensor& b, ImageTensor* grad,
                                 LossNorm norm = LossNorm::Mean) {
  LossReport r;
  r.content = loss_content(a, b, norm);
  r.gradient = loss_gradient(a, b, norm);
  r.total = r.content + r.gradient;
  if (grad) {
    const double sc = detail::loss_scale(a, norm);
    const std::size_t H = a.height(), W = a.width();
    *grad = ImageTensor(a.channels(), H, W);
    for (std::size_t c = 0; c < a.channels(); ++c)
      for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x) {
          auto e = [&](std::size_t yy, std::size_t xx) { return a(c, yy, xx) - b(c, yy, xx); };
          const std::size_t yp = (y + 1) % H, ym = (y + H - 1) % H;
          const std::size_t xp = (x + 1) % W, xm = (x + W - 1) % W;
          const double e0 = e(y, x);
          const double dv = e(yp, x) - e0, dv_prev = e0 - e(ym, x);
          const double dh = e(y, xp) - e0, dh_prev = e0 - e(y, xm);
          (*grad)(c, y, x) = 2.0 * sc * (e0 + dv_prev - dv + dh_prev - dh);
        }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
  std::size_t epochs = 50;
  std::size_t batch = 1;
  std::size_t crop = 256;
  std::size_t scale = 2;
  std::uint64_t seed = 0;
  bool toy = false;
  bool online = false;
  LossNorm loss_norm = LossNorm::Mean;

  static TrainConfig toy_defaults(std::size_t scale = 2) {
    TrainConfig c;
    c.epochs = 5;
    c.crop = 64;
    c.scale = scale;
    c.toy = true;
    return c;
  }
};

/// Per-array AMSGrad moments, shaped like the parameters.
struct AdamState {
  struct Slot {
    std::vector<double> m, v, v_max;
  };
  std::vector<Slot> slots;
  std::uint64_t step = 0;

  static AdamState for_params(const std::vector<ParamView>& params) {
    AdamState s;
    for (auto& p : params) {
      const std::size_t n = p.values.size();
      s.slots.push_back({std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)});
    }
    return s;
  }
};

/// Decoupled weight decay p -= lr * wd * p, then one AMSGrad step with bias
/// correction.
inline void adam_step(std::vector<ParamView>& params, const std::vector<ParamView>& grads, AdamState& state,
                      const TrainConfig& cfg) {
  require(params.size() == grads.size() && params.size() == state.slots.size(), ErrorCode::ShapeMismatch,
          "optimizer: parameter, gradient and state counts differ");
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, double(state.step));
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto p = params[b].values;
    auto g = grads[b].values;
    auto& s = state.slots[b];
    require(p.size() == g.size() && p.size() == s.m.size(), ErrorCode::ShapeMismatch,
            "optimizer: shape mismatch for " + params[b].name);
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] -= cfg.lr * cfg.weight_decay * p[i];
      s.m[i] = cfg.beta1 * s.m[i] + (1.0 - cfg.beta1) * g[i];
      s.v[i] = cfg.beta2 * s.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      s.v_max[i] = std::max(s.v_max[i], s.v[i]);
      p[i] -= cfg.lr * (s.m[i] / bc1) / (std::sqrt(s.v_max[i] / bc2) + cfg.eps);
    }
  }
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

struct ModelCheckpoint {
  static constexpr std::uint32_t kVersion = 1;
  std::uint32_t version = kVersion;
  SrwdModel model;
  TrainConfig train;
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
};

inline nlohmann::json to_json(const DenoiserConfig& c) {
  return {{"channels", c.channels}, {"features", c.features}, {"units", c.units},
          {"head_side", c.head_side}, {"unit_side", c.unit_side}};
}

inline nlohmann::json to_json(const ModelConfig& c) {
  return {{"scale", c.scale},
          {"channels", c.channels},
          {"denoiser", to_json(c.denoiser)},
          {"iterations", c.iterations},
          {"stages", c.stages},
          {"shared_denoiser", c.shared_denoiser},
          {"wiener_side", c.wiener_side},
          {"wiener_filters", c.wiener_filters},
          {"alpha0", c.alpha0},
          {"gamma0", c.gamma0},
          {"lambda0", c.lambda0},
          {"sigma_modulation", c.sigma_modulation}};
}

inline nlohmann::json to_json(const TrainConfig& c) {
  return {{"lr", c.lr},       {"beta1", c.beta1}, {"beta2", c.beta2},   {"eps", c.eps},
          {"weight_decay", c.weight_decay},       {"epochs", c.epochs}, {"batch", c.batch},
          {"crop", c.crop},   {"scale", c.scale}, {"seed", c.seed},     {"toy", c.toy},
          {"online", c.online}, {"loss_norm", std::string(to_string(c.loss_norm))}};
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  const auto& d = j.at("denoiser");
  c.denoiser = {d.at("channels"), d.at("features"), d.at("units"), d.at("head_side"), d.at("unit_side")};
  c.scale = j.at("scale");
  c.channels = j.at("channels");
  c.iterations = j.at("iterations");
  c.stages = j.at("stages");
  c.shared_denoiser = j.at("shared_denoiser");
  c.wiener_side = j.at("wiener_side");
  c.wiener_filters = j.at("wiener_filters");
  c.alpha0 = j.at("alpha0");
  c.gamma0 = j.at("gamma0");
  c.lambda0 = j.at("lambda0");
  c.sigma_modulation = j.at("sigma_modulation");
  return c;
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.lr = j.at("lr");
  c.beta1 = j.at("beta1");
  c.beta2 = j.at("beta2");
  c.eps = j.at("eps");
  c.weight_decay = j.at("weight_decay");
  c.epochs = j.at("epochs");
  c.batch = j.at("batch");
  c.crop = j.at("crop");
  c.scale = j.at("scale");
  c.seed = j.at("seed");
  c.toy = j.at("toy");
  c.online = j.at("online");
  c.loss_norm = parse_loss_norm(j.at("loss_norm").get<std::string>());
  return c;
}

namespace detail {

inline constexpr char kCheckpointMagic[8] = {'S', 'R', 'W', 'D', 'C', 'K', 'P', 'T'};

class ByteWriter {
 public:
  void bytes(const void* p, std::size_t n) {
    auto b = static_cast<const unsigned char*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  std::vector<unsigned char>& buffer() { return buf_; }

 private:
  std::vector<unsigned char> buf_;
};

class ByteReader {
 public:
  ByteReader(const unsigned char* p, std::size_t n) : p_(p), n_(n) {}
  void need(std::size_t k) const {
    require(k <= n_ - pos_, ErrorCode::CorruptFile, "checkpoint is truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(p_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(p_[pos_++]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint64_t len = u64();
    need(len);
    std::string s(reinterpret_cast<const char*>(p_ + pos_), len);
    pos_ += len;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  const unsigned char* p_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Layout (little endian): magic[8], u32 version, u32 scale, u32 flags,
/// metadata JSON (u64 length + bytes), u32 blob count, then per blob the name,
/// u32 rank, u64 dims and f64 values; finally a CRC-32 of all prior bytes.
inline std::vector<unsigned char> serialize_checkpoint(const ModelCheckpoint& ckpt) {
  SrwdModel model = ckpt.model;
  detail::ByteWriter w;
  w.bytes(detail::kCheckpointMagic, 8);
  w.u32(ckpt.version);
  w.u32(std::uint32_t(model.scale()));
  w.u32((model.config.shared_denoiser ? 1u : 0u) | (model.config.sigma_modulation ? 2u : 0u));
  nlohmann::json meta{{"model", to_json(model.config)},
                      {"train", to_json(ckpt.train)},
                      {"seed", ckpt.seed},
                      {"epoch", ckpt.epoch},
                      {"loss_norm", std::string(to_string(ckpt.train.loss_norm))},
                      {"stages", model.stage.stages}};
  w.str(meta.dump());
  auto params = model.params();
  w.u32(std::uint32_t(params.size()));
  for (auto& p : params) {
    w.str(p.name);
    w.u32(std::uint32_t(p.shape.size()));
    for (auto d : p.shape) w.u64(d);
    for (double v : p.values) w.f64(v);
  }
  auto& buf = w.buffer();
  const std::uint32_t crc = std::uint32_t(::crc32(0L, buf.data(), static_cast<uInt>(buf.size())));
  w.u32(crc);
  return buf;
}

inline ModelCheckpoint deserialize_checkpoint(const std::vector<unsigned char>& buf) {
  require(buf.size() >= 8 + 12 + 4 && std::memcmp(buf.data(), detail::kCheckpointMagic, 8) == 0,
          ErrorCode::CorruptFile, "not a checkpoint file");
  detail::ByteReader r(buf.data() + 8, buf.size() - 8);
  ModelCheckpoint ckpt;
  ckpt.version = r.u32();
  require(ckpt.version == ModelCheckpoint::kVersion, ErrorCode::VersionMismatch,
          "checkpoint version " + std::to_string(ckpt.version) + ", expected " +
              std::to_string(ModelCheckpoint::kVersion));
  const std::size_t body = buf.size() - 4;
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) stored |= std::uint32_t(buf[body + i]) << (8 * i);
  require(stored == std::uint32_t(::crc32(0L, buf.data(), static_cast<uInt>(body))), ErrorCode::CorruptFile,
          "checkpoint checksum mismatch");

  detail::ByteReader in(buf.data() + 8, body - 8);
  in.u32();
  const std::uint32_t scale = in.u32();
  in.u32();  // flags are mirrored in the metadata
  try {
    auto meta = nlohmann::json::parse(in.str());
    ModelConfig mc = model_config_from_json(meta.at("model"));
    require(mc.scale == scale, ErrorCode::CorruptFile, "header scale disagrees with metadata");
    ckpt.train = train_config_from_json(meta.at("train"));
    ckpt.seed = meta.at("seed");
    ckpt.epoch = meta.at("epoch");
    ckpt.model = model_init(mc, ckpt.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptFile, std::string("checkpoint metadata: ") + e.what());
  }
  auto params = ckpt.model.params();
  std::map<std::string, ParamView*> by_name;
  for (auto& p : params) by_name[p.name] = &p;
  const std::uint32_t count = in.u32();
  require(count == params.size(), ErrorCode::CorruptFile, "checkpoint blob count does not match its config");
  for (std::uint32_t b = 0; b < count; ++b) {
    const std::string name = in.str();
    auto it = by_name.find(name);
    require(it != by_name.end(), ErrorCode::CorruptFile, "unknown checkpoint blob " + name);
    const std::uint32_t rank = in.u32();
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = in.u64();
    require(shape == it->second->shape, ErrorCode::CorruptFile, "shape mismatch for blob " + name);
    for (double& v : it->second->values) v = in.f64();
  }
  require(in.pos() == body - 8, ErrorCode::CorruptFile, "trailing bytes in checkpoint");
  return ckpt;
}

inline void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  require(bool(out), ErrorCode::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  require(bool(out), ErrorCode::IoError, "failed writing " + path.string());
}

inline ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(bool(in), ErrorCode::IoError, "cannot read " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

inline void check_checkpoint_scale(const ModelCheckpoint& ckpt, std::size_t scale) {
  require(ckpt.model.scale() == scale, ErrorCode::ScaleMismatch,
          "checkpoint was trained for x" + std::to_string(ckpt.model.scale()) + ", requested x" +
              std::to_string(scale));
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

struct TrainingSample {
  std::string id;
  ImageTensor hr, lr;
  BlurKernel kernel;
  double sigma = 0.01;
};

/// Loads every usable manifest entry; HR images are cropped to `crop`
/// (aligned to the scale) and LR images to the matching region.
inline std::vector<TrainingSample> load_samples(const DatasetManifest& manifest, std::size_t scale,
                                                std::size_t crop = 0) {
  auto records = manifest.usable();
  require(!records.empty(), ErrorCode::EmptyManifest, "manifest has no usable entries");
  std::vector<TrainingSample> out(records.size());
  parallel_for(records.size(), [&](std::size_t i) {
    const auto& r = *records[i];
    require(r.scale == scale, ErrorCode::ScaleMismatch,
            r.id + " has scale x" + std::to_string(r.scale) + ", expected x" + std::to_string(scale));
    TrainingSample s;
    s.id = r.id;
    s.hr = read_png(manifest.resolve(r.hr_path)).pixels;
    s.lr = read_png(manifest.resolve(r.lr_path)).pixels;
    s.kernel = load_kernel(manifest.resolve(r.kernel_path));
    s.sigma = r.sigma;
    require(s.hr.height() == scale * s.lr.height() && s.hr.width() == scale * s.lr.width(),
            ErrorCode::ShapeMismatch, r.id + ": HR and LR sizes are inconsistent with the scale");
    if (crop > 0 && (s.hr.height() > crop || s.hr.width() > crop)) {
      const std::size_t lh = std::min(crop, s.hr.height()) / scale, lw = std::min(crop, s.hr.width()) / scale;
      const std::size_t oy = (s.lr.height() - lh) / 2, ox = (s.lr.width() - lw) / 2;
      ImageTensor lr(s.lr.channels(), lh, lw), hr(s.hr.channels(), lh * scale, lw * scale);
      for (std::size_t c = 0; c < lr.channels(); ++c)
        for (std::size_t y = 0; y < lh; ++y)
          for (std::size_t x = 0; x < lw; ++x) lr(c, y, x) = s.lr(c, oy + y, ox + x);
      for (std::size_t c = 0; c < hr.channels(); ++c)
        for (std::size_t y = 0; y < lh * scale; ++y)
          for (std::size_t x = 0; x < lw * scale; ++x) hr(c, y, x) = s.hr(c, oy * scale + y, ox * scale + x);
      s.hr = std::move(hr);
      s.lr = std::move(lr);
    }
    out[i] = std::move(s);
  });
  return out;
}

/// Fresh kernel, noise level and noise draw for one (epoch, sample) pair.
inline TrainingSample resample_online(const TrainingSample& base, std::size_t scale, std::uint64_t seed,
                                      std::uint64_t draw, const std::vector<double>& sigma_set = {0.01, 0.02,
                                                                                                  0.03, 0.05}) {
  Rng rng = make_stream(seed, draw, stream::kOnline);
  const std::size_t lr_side = std::min(base.hr.height(), base.hr.width()) / scale;
  std::vector<std::size_t> sizes;
  for (auto k : kMotionKernelSizes)
    if (k <= lr_side) sizes.push_back(k);
  require(!sizes.empty(), ErrorCode::KernelTooLarge, "LR crop too small for motion kernels");
  std::uniform_int_distribution<std::size_t> pick(0, sizes.size() - 1), pick_sigma(0, sigma_set.size() - 1);
  TrainingSample s = base;
  s.kernel = synth_motion_kernel(sizes[pick(rng)], rng());
  s.sigma = sigma_set[pick_sigma(rng)];
  s.lr = degrade(base.hr, {scale, s.sigma, DegradationVariant::DownThenBlur, rng()}, s.kernel);
  return s;
}

struct EpochReport {
  std::size_t epoch = 0;
  LossReport mean;
  double wall_seconds = 0.0;
};

struct TrainResult {
  ModelCheckpoint checkpoint;
  std::vector<EpochReport> epochs;
};

/// Loss and parameter gradients for one sample.
inline LossReport sample_step(const TrainingSample& s, const SrwdModel& model, LossNorm norm, SrwdModel* grad) {
  ForwardCache cache;
  ImageTensor out = srwdnet_forward(s.lr, s.kernel, std::max(s.sigma, 1e-4), model, grad ? &cache : nullptr);
  ImageTensor g;
  LossReport r = loss_with_grad(out, s.hr, grad ? &g : nullptr, norm);
  if (grad) *grad = srwdnet_backward(g, cache, model);
  return r;
}

struct TrainHooks {
  std::function<void(const EpochReport&, const ModelCheckpoint&)> on_epoch;
  std::function<void(std::size_t epoch, std::size_t sample, const LossReport&)> on_sample;
};

/// Joint training of every parameter with AMSGrad. Deterministic given
/// (samples, configs, seed).
inline TrainResult train(const std::vector<TrainingSample>& samples, const ModelConfig& model_cfg,
                         const TrainConfig& cfg, const TrainHooks& hooks = {}) {
  require(!samples.empty(), ErrorCode::EmptyManifest, "no training samples");
  require(model_cfg.scale == cfg.scale, ErrorCode::ScaleMismatch, "model and training scales differ");
  require(cfg.batch >= 1 && cfg.lr >= 0.0 && cfg.weight_decay >= 0.0, ErrorCode::BadFlag,
          "batch must be >= 1, lr and weight decay >= 0");
  TrainResult result;
  ModelCheckpoint& ckpt = result.checkpoint;
  ckpt.model = model_init(model_cfg, cfg.seed);
  ckpt.train = cfg;
  ckpt.seed = cfg.seed;
  auto params = ckpt.model.params();
  AdamState adam = AdamState::for_params(params);

  std::vector<std::size_t> order(samples.size());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = make_stream(cfg.seed, epoch, stream::kShuffle);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    LossReport sum;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t end = std::min(order.size(), start + cfg.batch);
      SrwdModel batch_grad = ckpt.model.zeros_like();
      auto bg = batch_grad.params();
      for (std::size_t j = start; j < end; ++j) {
        const std::size_t idx = order[j];
        TrainingSample online;
        if (cfg.online) online = resample_online(samples[idx], cfg.scale, cfg.seed, epoch * samples.size() + idx);
        const TrainingSample& s = cfg.online ? online : samples[idx];
        SrwdModel g;
        LossReport r = sample_step(s, ckpt.model, cfg.loss_norm, &g);
        auto gp = g.params();
        const double w = 1.0 / double(end - start);
        for (std::size_t b = 0; b < bg.size(); ++b)
          for (std::size_t i = 0; i < bg[b].values.size(); ++i) bg[b].values[i] += w * gp[b].values[i];
        sum.content += r.content;
        sum.gradient += r.gradient;
        sum.total += r.total;
        if (hooks.on_sample) hooks.on_sample(epoch, j, r);
      }
      adam_step(params, bg, adam, cfg);
      for (double& l : ckpt.model.stage.lambda) l = std::max(l, 0.0);
    }
    EpochReport rep;
    rep.epoch = epoch + 1;
    const double n = double(samples.size());
    rep.mean = {sum.content / n, sum.gradient / n, sum.total / n};
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ckpt.epoch = epoch + 1;
    result.epochs.push_back(rep);
    if (hooks.on_epoch) hooks.on_epoch(rep, ckpt);
  }
  return result;
}

inline std::string epoch_log_line(const EpochReport& r) {
  return nlohmann::json{{"epoch", r.epoch},
                        {"mean_content", r.mean.content},
                        {"mean_grad", r.mean.gradient},
                        {"mean_total", r.mean.total},
                        {"wall_seconds", r.wall_seconds}}
      .dump();
}

}  // namespace srwd
