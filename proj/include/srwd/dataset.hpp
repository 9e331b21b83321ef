#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "srwd/degradation.hpp"
#include "srwd/image_io.hpp"
#include "srwd/parallel.hpp"

namespace srwd {

namespace fs = std::filesystem;

struct ManifestRecord {
  std::string id;
  std::string hr_path;  // relative to the manifest directory
  std::string lr_path;
  std::string kernel_path;
  double sigma = 0.0;
  std::size_t scale = 2;
  std::uint64_t seed = 0;
  DegradationVariant variant = DegradationVariant::DownThenBlur;
  bool skipped = false;
  std::string note;
};

/// Line-oriented manifest: a JSON header line followed by one JSON object per
/// record.
struct DatasetManifest {
  static constexpr int kVersion = 1;
  int version = kVersion;
  fs::path base_dir;
  std::vector<ManifestRecord> records;

  std::vector<const ManifestRecord*> usable() const {
    std::vector<const ManifestRecord*> out;
    for (auto& r : records)
      if (!r.skipped) out.push_back(&r);
    return out;
  }
  fs::path resolve(const std::string& rel) const { return base_dir / rel; }
};

inline std::string manifest_to_string(const DatasetManifest& m) {
  std::ostringstream out;
  out << nlohmann::json{{"format", "srwd-manifest"}, {"version", m.version}}.dump() << '\n';
  for (const auto& r : m.records) {
    nlohmann::json j{{"id", r.id},
                     {"hr", r.hr_path},
                     {"lr", r.lr_path},
                     {"kernel", r.kernel_path},
                     {"sigma", r.sigma},
                     {"scale", r.scale},
                     {"seed", r.seed},
                     {"variant", std::string(to_string(r.variant))}};
    if (r.skipped) j["skipped"] = r.note;
    out << j.dump() << '\n';
  }
  return out.str();
}

inline void save_manifest(const fs::path& path, const DatasetManifest& m) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(bool(out), ErrorCode::IoError, "cannot write " + path.string());
  out << manifest_to_string(m);
}

inline DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  require(bool(in), ErrorCode::IoError, "cannot read manifest " + path.string());
  DatasetManifest m;
  m.base_dir = path.parent_path();
  std::string line;
  require(bool(std::getline(in, line)), ErrorCode::CorruptFile, "empty manifest");
  try {
    auto header = nlohmann::json::parse(line);
    require(header.value("format", "") == "srwd-manifest", ErrorCode::CorruptFile,
            "not a manifest: " + path.string());
    m.version = header.at("version").get<int>();
    require(m.version == DatasetManifest::kVersion, ErrorCode::VersionMismatch,
            "manifest version " + std::to_string(m.version));
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto j = nlohmann::json::parse(line);
      ManifestRecord r;
      r.id = j.at("id");
      r.hr_path = j.at("hr");
      r.lr_path = j.value("lr", "");
      r.kernel_path = j.value("kernel", "");
      r.sigma = j.value("sigma", 0.0);
      r.scale = j.value("scale", std::size_t{2});
      r.seed = j.value("seed", std::uint64_t{0});
      r.variant = parse_variant(j.value("variant", "eq3"));
      if (j.contains("skipped")) {
        r.skipped = true;
        r.note = j["skipped"];
      }
      m.records.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptFile, path.string() + ": " + e.what());
  }
  return m;
}

enum class KernelPairing {
  AllPairs,    // every image with every kernel
  RoundRobin,  // image i with kernel i mod count
};

struct DatasetOptions {
  fs::path hr_dir;
  fs::path out_dir;
  std::vector<std::size_t> scales{2};
  std::size_t kernel_count = 10;
  fs::path kernel_dir;  // if set, kernels are loaded instead of synthesized
  std::vector<std::size_t> kernel_sizes{kMotionKernelSizes.begin(), kMotionKernelSizes.end()};
  MotionParams motion{};
  std::vector<double> sigma_set{0.01, 0.02, 0.03, 0.05};
  std::size_t crop = 256;
  std::uint64_t seed = 0;
  DegradationVariant variant = DegradationVariant::DownThenBlur;
  KernelPairing pairing = KernelPairing::AllPairs;
  int lr_bit_depth = 16;
};

inline std::vector<fs::path> list_files(const fs::path& dir, std::string_view ext) {
  std::vector<fs::path> out;
  require(fs::is_directory(dir), ErrorCode::IoError, "not a directory: " + dir.string());
  for (auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

/// Synthesizes `count` motion kernels with sizes drawn uniformly from `sizes`.
inline std::vector<BlurKernel> generate_kernel_set(std::size_t count, std::uint64_t seed,
                                                   const std::vector<std::size_t>& sizes,
                                                   const MotionParams& motion = {}) {
  require(!sizes.empty(), ErrorCode::BadFlag, "empty kernel size set");
  std::vector<BlurKernel> out;
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = make_stream(seed, i, stream::kKernel);
    std::uniform_int_distribution<std::size_t> pick(0, sizes.size() - 1);
    const std::size_t side = sizes[pick(rng)];
    out.push_back(synth_motion_kernel(side, rng(), motion));
  }
  return out;
}

inline std::string kernel_file_name(std::size_t i) {
  std::ostringstream s;
  s << "kernel_" << std::setw(2) << std::setfill('0') << i;
  return s.str();
}

/// Writes kernels as text plus PNG previews; returns the text file names.
inline std::vector<std::string> write_kernel_set(const fs::path& dir,
                                                 const std::vector<BlurKernel>& kernels) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    const std::string stem = kernel_file_name(i);
    save_kernel(dir / (stem + ".txt"), kernels[i]);
    save_kernel_png(dir / (stem + ".png"), kernels[i]);
    names.push_back(stem + ".txt");
  }
  return names;
}

/// Builds a degraded dataset from a directory of HR PNGs. Each HR image is
/// center-cropped to `crop` (then to a multiple of the scale), paired with
/// kernels, degraded with a per-entry noise level drawn from sigma_set, and
/// written out with a manifest. Output depends only on the inputs and seed.
inline DatasetManifest gen_dataset(const DatasetOptions& opt, std::ostream& log = std::cerr) {
  auto hr_files = list_files(opt.hr_dir, ".png");
  require(!hr_files.empty(), ErrorCode::EmptyInputDir, "no PNG files in " + opt.hr_dir.string());
  require(!opt.sigma_set.empty(), ErrorCode::BadFlag, "empty sigma set");
  for (auto s : opt.scales) check_scale(s);

  std::vector<BlurKernel> kernels;
  std::vector<std::string> kernel_names;
  if (!opt.kernel_dir.empty()) {
    for (auto& p : list_files(opt.kernel_dir, ".txt")) {
      kernels.push_back(load_kernel(p));
      kernel_names.push_back(p.filename().string());
    }
    require(!kernels.empty(), ErrorCode::EmptyInputDir, "no kernels in " + opt.kernel_dir.string());
    for (std::size_t i = 0; i < kernels.size(); ++i) save_kernel(opt.out_dir / "kernels" / kernel_names[i], kernels[i]);
  } else {
    kernels = generate_kernel_set(opt.kernel_count, opt.seed, opt.kernel_sizes, opt.motion);
    kernel_names = write_kernel_set(opt.out_dir / "kernels", kernels);
  }

  struct Job {
    std::size_t image = 0, scale = 0, kernel = 0;
    ManifestRecord record;
  };
  std::vector<Job> jobs;
  std::vector<ManifestRecord> skipped;
  std::vector<PngImage> images(hr_files.size());
  for (std::size_t a = 0; a < hr_files.size(); ++a) {
    images[a] = read_png(hr_files[a]);
    const auto& px = images[a].pixels;
    const std::string stem = hr_files[a].stem().string();
    if (px.height() < opt.crop || px.width() < opt.crop) {
      log << "warning: skipping " << hr_files[a].filename().string() << " (" << px.height() << "x"
          << px.width() << " < crop " << opt.crop << ")\n";
      ManifestRecord r;
      r.id = stem;
      r.hr_path = hr_files[a].filename().string();
      r.skipped = true;
      r.note = "ImageTooSmall";
      skipped.push_back(r);
      continue;
    }
    for (std::size_t s : opt.scales) {
      std::vector<std::size_t> ks;
      if (opt.pairing == KernelPairing::AllPairs)
        for (std::size_t b = 0; b < kernels.size(); ++b) ks.push_back(b);
      else
        ks.push_back(a % kernels.size());
      for (std::size_t b : ks) {
        Job j;
        j.image = a;
        j.scale = s;
        j.kernel = b;
        j.record.id = stem + "_x" + std::to_string(s) + "_k" + std::to_string(b);
        j.record.hr_path = "hr/x" + std::to_string(s) + "/" + stem + ".png";
        j.record.lr_path = "lr/x" + std::to_string(s) + "/" + j.record.id + ".png";
        j.record.kernel_path = "kernels/" + kernel_names[b];
        j.record.scale = s;
        j.record.variant = opt.variant;
        jobs.push_back(std::move(j));
      }
    }
  }

  // Validate before writing anything expensive.
  for (auto& j : jobs) {
    const std::size_t side = opt.crop / j.scale;
    if (opt.variant == DegradationVariant::DownThenBlur)
      require(kernels[j.kernel].side() <= side, ErrorCode::KernelTooLarge,
              "kernel " + kernel_names[j.kernel] + " exceeds LR grid " + std::to_string(side));
  }

  std::vector<std::set<std::size_t>> written_hr(hr_files.size());
  for (std::size_t e = 0; e < jobs.size(); ++e) {
    Rng rng = make_stream(opt.seed, e, stream::kDataset);
    std::uniform_int_distribution<std::size_t> pick(0, opt.sigma_set.size() - 1);
    jobs[e].record.sigma = opt.sigma_set[pick(rng)];
    jobs[e].record.seed = rng();
  }

  // HR crops, one per (image, scale).
  for (auto& j : jobs) {
    if (!written_hr[j.image].insert(j.scale).second) continue;
    const std::size_t side = (opt.crop / j.scale) * j.scale;
    auto hr = center_crop(images[j.image].pixels, side, side);
    write_png(opt.out_dir / j.record.hr_path, hr, images[j.image].bit_depth);
  }

  parallel_for(jobs.size(), [&](std::size_t e) {
    const Job& j = jobs[e];
    const std::size_t side = (opt.crop / j.scale) * j.scale;
    auto hr = center_crop(images[j.image].pixels, side, side);
    DegradationSpec spec{j.scale, j.record.sigma, j.record.variant, j.record.seed};
    write_png(opt.out_dir / j.record.lr_path, degrade(hr, spec, kernels[j.kernel]), opt.lr_bit_depth);
  });

  DatasetManifest m;
  m.base_dir = opt.out_dir;
  for (auto& j : jobs) m.records.push_back(j.record);
  for (auto& r : skipped) m.records.push_back(r);
  save_manifest(opt.out_dir / "manifest.jsonl", m);
  return m;
}

}  // namespace srwd
