#pragma once

#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "srwd/dataset.hpp"
#include "srwd/error.hpp"
#include "srwd/image_io.hpp"
#include "srwd/parallel.hpp"
#include "srwd/solver.hpp"
#include "srwd/tensor.hpp"

namespace srwd {

inline constexpr double kPsnrCap = 100.0;

/// 10 log10(peak^2 / MSE) over all pixels and channels; +inf for identical
/// inputs.
inline double psnr(const ImageTensor& a, const ImageTensor& b, double peak = 1.0) {
  require(a.same_shape(b), ErrorCode::ShapeMismatch, "psnr: shapes differ");
  require(peak > 0.0, ErrorCode::BadFlag, "psnr: peak must be positive");
  double se = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    se += d * d;
  }
  if (se == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / (se / double(a.size())));
}

inline double capped(double db) { return std::min(db, kPsnrCap); }

struct SsimOptions {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double peak = 1.0;
};

/// Single-scale SSIM with a normalized Gaussian window, averaged over valid
/// window positions and then over channels.
inline double ssim(const ImageTensor& a, const ImageTensor& b, const SsimOptions& o = {}) {
  require(a.same_shape(b), ErrorCode::ShapeMismatch, "ssim: shapes differ");
  require(a.height() >= o.window && a.width() >= o.window, ErrorCode::ImageTooSmall,
          "ssim: image smaller than the window");
  const std::size_t n = o.window;
  const double r = double(n - 1) / 2.0;
  std::vector<double> g(n * n);
  double total = 0.0;
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) {
      const double dy = double(y) - r, dx = double(x) - r;
      total += g[y * n + x] = std::exp(-(dx * dx + dy * dy) / (2.0 * o.sigma * o.sigma));
    }
  for (double& v : g) v /= total;
  const double c1 = (o.k1 * o.peak) * (o.k1 * o.peak), c2 = (o.k2 * o.peak) * (o.k2 * o.peak);

  const std::size_t oh = a.height() - n + 1, ow = a.width() - n + 1;
  double acc_channels = 0.0;
  for (std::size_t c = 0; c < a.channels(); ++c) {
    double acc = 0.0;
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x) {
        double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) {
            const double w = g[i * n + j], va = a(c, y + i, x + j), vb = b(c, y + i, x + j);
            ma += w * va;
            mb += w * vb;
            saa += w * va * va;
            sbb += w * vb * vb;
            sab += w * va * vb;
          }
        const double var_a = saa - ma * ma, var_b = sbb - mb * mb, cov = sab - ma * mb;
        acc += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
      }
    acc_channels += acc / double(oh * ow);
  }
  return acc_channels / double(a.channels());
}

/// BT.601 luma as in Matlab's rgb2ycbcr, scaled to [0,1].
inline ImageTensor luma(const ImageTensor& rgb) {
  if (rgb.channels() == 1) return rgb;
  require(rgb.channels() == 3, ErrorCode::BadShape, "luma needs 1 or 3 channels");
  ImageTensor y(1, rgb.height(), rgb.width());
  for (std::size_t i = 0; i < rgb.plane_size(); ++i)
    y.data()[i] = (16.0 + 65.481 * rgb.plane(0)[i] + 128.553 * rgb.plane(1)[i] + 24.966 * rgb.plane(2)[i]) / 255.0;
  return y;
}

struct MetricPair {
  double psnr = 0.0;
  double ssim = 0.0;
};

inline MetricPair measure(const ImageTensor& restored, const ImageTensor& truth, bool use_luma = false) {
  if (use_luma) {
    auto a = luma(restored), b = luma(truth);
    return {psnr(a, b), ssim(a, b)};
  }
  return {psnr(restored, truth), ssim(restored, truth)};
}

enum class Method { Bicubic, Srwdnet };

inline std::string_view to_string(Method m) { return m == Method::Bicubic ? "bicubic" : "srwdnet"; }

inline Method parse_method(std::string_view s) {
  if (s == "bicubic") return Method::Bicubic;
  if (s == "srwdnet") return Method::Srwdnet;
  throw Error(ErrorCode::BadFlag, "unknown method '" + std::string(s) + "'");
}

inline ImageTensor bicubic_baseline(const ImageTensor& lr, std::size_t scale) {
  return clamp_project(bicubic_resize(lr, scale, ResizeDirection::Up), 0.0, 1.0);
}

struct EvalRow {
  std::string id;
  Method method = Method::Bicubic;
  std::size_t scale = 2;
  double sigma = 0.0;
  MetricPair metrics;
};

struct EvalTable {
  std::vector<EvalRow> rows;
};

/// Mean of capped PSNR and of SSIM over rows.
inline MetricPair mean_metrics(const std::vector<const EvalRow*>& rows) {
  MetricPair m;
  if (rows.empty()) return m;
  for (auto* r : rows) {
    m.psnr += capped(r->metrics.psnr);
    m.ssim += r->metrics.ssim;
  }
  m.psnr /= double(rows.size());
  m.ssim /= double(rows.size());
  return m;
}

/// Restores every usable manifest entry with `method` and scores it
/// against its HR image. `model` is required for Method::Srwdnet.
inline EvalTable evaluate_manifest(const DatasetManifest& manifest, Method method, const SrwdModel* model = nullptr,
                                   bool use_luma = false) {
  auto records = manifest.usable();
  require(!records.empty(), ErrorCode::EmptyManifest, "manifest has no usable entries");
  if (method == Method::Srwdnet) {
    require(model != nullptr, ErrorCode::BadFlag, "srwdnet evaluation needs a checkpoint");
    for (auto* r : records)
      require(r->scale == model->scale(), ErrorCode::ScaleMismatch,
              r->id + " is x" + std::to_string(r->scale) + " but the checkpoint is x" +
                  std::to_string(model->scale()));
  }
  EvalTable table;
  table.rows.resize(records.size());
  parallel_for(records.size(), [&](std::size_t i) {
    const auto& r = *records[i];
    ImageTensor hr = read_png(manifest.resolve(r.hr_path)).pixels;
    ImageTensor lr = read_png(manifest.resolve(r.lr_path)).pixels;
    ImageTensor out;
    if (method == Method::Bicubic) {
      out = bicubic_baseline(lr, r.scale);
    } else {
      Kernel k = load_kernel(manifest.resolve(r.kernel_path));
      out = srwdnet_forward(lr, k, std::max(r.sigma, 1e-4), *model);
    }
    table.rows[i] = {r.id, method, r.scale, r.sigma, measure(out, hr, use_luma)};
  });
  return table;
}

inline std::string format_sigma(double sigma) {
  std::ostringstream s;
  s << sigma * 100.0 << "%";
  return s.str();
}

/// Tab-separated rows: one per image, then per-method group means by
/// (scale, sigma), then one overall mean per method.
inline std::string format_table(const std::vector<EvalTable>& tables) {
  std::ostringstream out;
  out << std::fixed;
  out << "id\tmethod\tscale\tsigma\tpsnr_db\tssim\n";
  auto row = [&](const std::string& id, std::string_view method, const std::string& scale, const std::string& sigma,
                 const MetricPair& m) {
    out << id << '\t' << method << '\t' << scale << '\t' << sigma << '\t' << std::setprecision(4)
        << capped(m.psnr) << '\t' << std::setprecision(6) << m.ssim << '\n';
  };
  for (auto& t : tables)
    for (auto& r : t.rows) row(r.id, to_string(r.method), std::to_string(r.scale), format_sigma(r.sigma), r.metrics);
  for (auto& t : tables) {
    if (t.rows.empty()) continue;
    std::map<std::pair<std::size_t, double>, std::vector<const EvalRow*>> groups;
    std::vector<const EvalRow*> all;
    for (auto& r : t.rows) {
      groups[{r.scale, r.sigma}].push_back(&r);
      all.push_back(&r);
    }
    for (auto& [key, rows] : groups)
      row("group_mean", to_string(t.rows[0].method), std::to_string(key.first), format_sigma(key.second),
          mean_metrics(rows));
    row("mean", to_string(t.rows[0].method), "*", "*", mean_metrics(all));
  }
  return out.str();
}

}  // namespace srwd
