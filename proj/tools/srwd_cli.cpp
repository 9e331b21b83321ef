// srwd: kernel generation, dataset synthesis, training, restoration and
// benchmarking for the SRWDNet super-resolution pipeline.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "srwd/srwd.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

double parse_percent(const std::string& text) {
  std::string s = text;
  if (!s.empty() && s.back() == '%') s.pop_back();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  srwd::require(used == s.size() && !s.empty() && v >= 0.0 && v <= 100.0, srwd::ErrorCode::BadFlag,
                "bad noise level '" + text + "' (expected a percentage such as 1%)");
  return v / 100.0;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::size_t parse_size(const std::string& s, const char* what) {
  std::size_t used = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  srwd::require(used == s.size() && !s.empty(), srwd::ErrorCode::BadFlag,
                std::string("bad ") + what + " '" + s + "'");
  return v;
}

/// "lo..hi" selects the standard motion-kernel sizes in [lo, hi]; otherwise
/// a comma-separated list of odd sizes.
std::vector<std::size_t> parse_kernel_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  if (auto dots = text.find(".."); dots != std::string::npos) {
    const std::size_t lo = parse_size(text.substr(0, dots), "size range");
    const std::size_t hi = parse_size(text.substr(dots + 2), "size range");
    for (auto k : srwd::kMotionKernelSizes)
      if (k >= lo && k <= hi) out.push_back(k);
    if (out.empty() && lo == hi) out.push_back(lo);
  } else {
    for (auto& part : split(text, ',')) out.push_back(parse_size(part, "kernel size"));
  }
  srwd::require(!out.empty(), srwd::ErrorCode::BadFlag, "kernel size set '" + text + "' is empty");
  for (auto k : out)
    srwd::require(k % 2 == 1 && k >= 11 && k <= 31, srwd::ErrorCode::BadSide,
                  "kernel size " + std::to_string(k) + " is not odd in [11, 31]");
  return out;
}

void write_run_record(const fs::path& path, const std::string& command, const std::vector<std::string>& argv,
                      const json& resolved) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  srwd::require(bool(out), srwd::ErrorCode::IoError, "cannot write run record " + path.string());
  json rec{{"tool", "srwd"}, {"version", kToolVersion}, {"command", command}, {"argv", argv}, {"config", resolved}};
  out << rec.dump(2) << '\n';
}

int exit_code(srwd::ErrorCode c) { return 10 + static_cast<int>(c); }

[[noreturn]] void fail(srwd::ErrorCode c, const std::string& msg) {
  std::string one_line = msg;
  for (char& ch : one_line)
    if (ch == '\n' || ch == '\r') ch = ' ';
  std::cerr << "error: code=" << srwd::to_string(c) << " message=" << one_line << std::endl;
  std::exit(exit_code(c));
}

// ---------------------------------------------------------------------------

struct KernelGenArgs {
  std::string out;
  std::size_t count = 10;
  std::string sizes = "11..31";
  std::uint64_t seed = 0;
  std::optional<std::size_t> steps;
  double inertia = 0.9;
  double shake = 0.02;
};

void cmd_kernel_gen(const KernelGenArgs& a, const std::vector<std::string>& argv) {
  srwd::MotionParams motion{a.steps, a.inertia, a.shake};
  auto sizes = parse_kernel_sizes(a.sizes);
  auto kernels = srwd::generate_kernel_set(a.count, a.seed, sizes, motion);
  auto names = srwd::write_kernel_set(a.out, kernels);
  std::ofstream idx(fs::path(a.out) / "kernels.jsonl");
  srwd::require(bool(idx), srwd::ErrorCode::IoError, "cannot write kernel index in " + a.out);
  for (std::size_t i = 0; i < kernels.size(); ++i)
    idx << json{{"file", names[i]}, {"side", kernels[i].side()}, {"index", i}}.dump() << '\n';
  json cfg{{"out", a.out},         {"count", a.count},       {"sizes", sizes},
           {"seed", a.seed},       {"steps", a.steps ? json(*a.steps) : json(nullptr)},
           {"inertia", a.inertia}, {"shake", a.shake}};
  write_run_record(fs::path(a.out) / "run.json", "kernel-gen", argv, cfg);
  std::cout << "wrote " << kernels.size() << " kernels to " << a.out << std::endl;
}

struct DegradeArgs {
  std::string hr, out, kernels, scales = "2", sigma = "1%,2%,3%,5%", variant = "eq3", pairing = "all";
  std::string sizes = "11..31";
  std::size_t kernel_count = 10, crop = 256;
  std::uint64_t seed = 0;
  int bit_depth = 16;
};

void cmd_degrade(const DegradeArgs& a, const std::vector<std::string>& argv) {
  srwd::DatasetOptions opt;
  opt.hr_dir = a.hr;
  opt.out_dir = a.out;
  opt.scales.clear();
  for (auto& s : split(a.scales, ',')) opt.scales.push_back(parse_size(s, "scale"));
  opt.sigma_set.clear();
  for (auto& s : split(a.sigma, ',')) opt.sigma_set.push_back(parse_percent(s));
  opt.variant = srwd::parse_variant(a.variant);
  if (opt.variant == srwd::DegradationVariant::BicubicOnly) opt.sigma_set = {0.0};
  if (a.pairing == "all")
    opt.pairing = srwd::KernelPairing::AllPairs;
  else if (a.pairing == "round-robin")
    opt.pairing = srwd::KernelPairing::RoundRobin;
  else
    throw srwd::Error(srwd::ErrorCode::BadFlag, "pairing must be 'all' or 'round-robin'");
  if (!a.kernels.empty()) opt.kernel_dir = a.kernels;
  opt.kernel_count = a.kernel_count;
  opt.kernel_sizes = parse_kernel_sizes(a.sizes);
  opt.crop = a.crop;
  opt.seed = a.seed;
  opt.lr_bit_depth = a.bit_depth;
  auto m = srwd::gen_dataset(opt, std::cerr);
  json cfg{{"hr", a.hr},
           {"out", a.out},
           {"kernels", a.kernels},
           {"scales", opt.scales},
           {"sigma", opt.sigma_set},
           {"variant", a.variant},
           {"pairing", a.pairing},
           {"kernel_count", a.kernel_count},
           {"sizes", opt.kernel_sizes},
           {"crop", a.crop},
           {"seed", a.seed},
           {"bit_depth", a.bit_depth}};
  write_run_record(fs::path(a.out) / "run.json", "degrade", argv, cfg);
  std::cout << "wrote " << m.usable().size() << " LR images (" << m.records.size() - m.usable().size()
            << " skipped) to " << a.out << std::endl;
}

struct TrainArgs {
  std::string manifest, out, log;
  std::size_t scale = 2;
  bool toy = false, online = false, unshared = false;
  std::optional<std::size_t> epochs, crop, features, units;
  std::size_t iterations = 4, stages = 1, batch = 1;
  std::uint64_t seed = 0;
  double lr = 1e-3, weight_decay = 1e-4;
};

void cmd_train(const TrainArgs& a, const std::vector<std::string>& argv) {
  auto manifest = srwd::load_manifest(a.manifest);
  srwd::TrainConfig cfg = a.toy ? srwd::TrainConfig::toy_defaults(a.scale) : srwd::TrainConfig{};
  cfg.scale = a.scale;
  cfg.seed = a.seed;
  cfg.online = a.online;
  cfg.lr = a.lr;
  cfg.weight_decay = a.weight_decay;
  cfg.batch = a.batch;
  if (a.epochs) cfg.epochs = *a.epochs;
  if (a.crop) cfg.crop = *a.crop;

  auto samples = srwd::load_samples(manifest, cfg.scale, cfg.crop);
  const std::size_t channels = samples.front().hr.channels();
  srwd::ModelConfig mc = a.toy ? srwd::ModelConfig::toy(cfg.scale, channels) : srwd::ModelConfig{};
  mc.scale = cfg.scale;
  mc.channels = channels;
  mc.denoiser.channels = channels;
  if (a.features) mc.denoiser.features = *a.features;
  if (a.units) mc.denoiser.units = *a.units;
  mc.iterations = a.iterations;
  mc.stages = a.stages;
  mc.shared_denoiser = !a.unshared;

  const fs::path ckpt_path = a.out;
  const fs::path log_path = a.log.empty() ? fs::path(a.out + ".log.jsonl") : fs::path(a.log);
  if (log_path.has_parent_path()) fs::create_directories(log_path.parent_path());
  std::ofstream log(log_path);
  srwd::require(bool(log), srwd::ErrorCode::IoError, "cannot write " + log_path.string());

  json resolved{{"manifest", a.manifest}, {"out", a.out},     {"log", log_path.string()},
                {"model", srwd::to_json(mc)}, {"train", srwd::to_json(cfg)}, {"samples", samples.size()}};
  write_run_record(a.out + ".run.json", "train", argv, resolved);
  std::cout << "training on " << samples.size() << " samples, " << cfg.epochs << " epochs" << std::endl;

  srwd::TrainHooks hooks;
  hooks.on_epoch = [&](const srwd::EpochReport& r, const srwd::ModelCheckpoint& ck) {
    srwd::save_checkpoint(ck, ckpt_path);
    const std::string line = srwd::epoch_log_line(r);
    log << line << '\n' << std::flush;
    std::cout << line << std::endl;
  };
  auto result = srwd::train(samples, mc, cfg, hooks);
  if (cfg.epochs == 0) srwd::save_checkpoint(result.checkpoint, ckpt_path);
  std::cout << "checkpoint " << ckpt_path.string() << std::endl;
}

struct RestoreArgs {
  std::string lr, kernel, sigma = "1%", ckpt, out;
  std::size_t scale = 2;
  bool delta = false;
  int bit_depth = 8;
};

void cmd_restore(const RestoreArgs& a, const std::vector<std::string>& argv) {
  srwd::require(a.delta != !a.kernel.empty(), srwd::ErrorCode::BadFlag, "give exactly one of --kernel or --delta");
  const double sigma = parse_percent(a.sigma);
  auto ckpt = srwd::load_checkpoint(a.ckpt);
  srwd::check_checkpoint_scale(ckpt, a.scale);
  auto lr = srwd::read_png(a.lr).pixels;
  srwd::Kernel k = a.delta ? srwd::Kernel::delta(1) : srwd::load_kernel(a.kernel);
  srwd::require(lr.channels() == ckpt.model.config.channels, srwd::ErrorCode::ShapeMismatch,
                "image has " + std::to_string(lr.channels()) + " channels, checkpoint expects " +
                    std::to_string(ckpt.model.config.channels));
  const auto t0 = std::chrono::steady_clock::now();
  auto hr = srwd::srwdnet_forward(lr, k, std::max(sigma, 1e-4), ckpt.model);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  srwd::write_png(a.out, hr, a.bit_depth);
  json cfg{{"lr", a.lr},       {"kernel", a.delta ? "delta" : a.kernel}, {"sigma", sigma},
           {"scale", a.scale}, {"ckpt", a.ckpt},  {"out", a.out},        {"bit_depth", a.bit_depth}};
  write_run_record(a.out + ".run.json", "restore", argv, cfg);
  std::cout << "restored " << lr.width() << "x" << lr.height() << " -> " << hr.width() << "x" << hr.height()
            << " in " << std::fixed << std::setprecision(3) << secs << " s" << std::endl;
}

struct BenchmarkArgs {
  std::string manifest, ckpt, methods = "bicubic,srwdnet", out;
  bool luma = false;
};

void cmd_benchmark(const BenchmarkArgs& a, const std::vector<std::string>& argv) {
  auto manifest = srwd::load_manifest(a.manifest);
  std::optional<srwd::ModelCheckpoint> ckpt;
  std::vector<srwd::EvalTable> tables;
  std::vector<std::string> names;
  for (auto& name : split(a.methods, ',')) {
    const auto method = srwd::parse_method(name);
    names.push_back(name);
    if (method == srwd::Method::Srwdnet && !ckpt) {
      srwd::require(!a.ckpt.empty(), srwd::ErrorCode::BadFlag, "method srwdnet needs --ckpt");
      ckpt = srwd::load_checkpoint(a.ckpt);
    }
    tables.push_back(srwd::evaluate_manifest(manifest, method, ckpt ? &ckpt->model : nullptr, a.luma));
  }
  srwd::require(!tables.empty(), srwd::ErrorCode::BadFlag, "no methods given");
  const std::string report = srwd::format_table(tables);
  std::cout << report << std::flush;
  if (!a.out.empty()) {
    fs::path p(a.out);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p);
    srwd::require(bool(f), srwd::ErrorCode::IoError, "cannot write " + a.out);
    f << report;
    json cfg{{"manifest", a.manifest}, {"ckpt", a.ckpt}, {"methods", names}, {"luma", a.luma}, {"out", a.out}};
    write_run_record(a.out + ".run.json", "benchmark", argv, cfg);
  }
}

int run(int argc, char** argv);

int replay(const std::string& record_path) {
  std::ifstream in(record_path);
  srwd::require(bool(in), srwd::ErrorCode::IoError, "cannot read " + record_path);
  json rec;
  try {
    rec = json::parse(in);
  } catch (const json::exception& e) {
    throw srwd::Error(srwd::ErrorCode::CorruptFile, record_path + ": " + e.what());
  }
  auto args = rec.at("argv").get<std::vector<std::string>>();
  srwd::require(!args.empty() && args[0] != "replay", srwd::ErrorCode::CorruptFile, "run record has no command");
  std::vector<std::string> full{"srwd"};
  full.insert(full.end(), args.begin(), args.end());
  std::vector<char*> ptrs;
  for (auto& s : full) ptrs.push_back(s.data());
  return run(int(ptrs.size()), ptrs.data());
}

int run(int argc, char** argv) {
  CLI::App app{"SRWDNet super-resolution: kernels, datasets, training, restoration, benchmarks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  std::vector<std::string> args(argv + 1, argv + argc);

  KernelGenArgs kg;
  auto* c_kg = app.add_subcommand("kernel-gen", "synthesize random motion-blur kernels");
  c_kg->add_option("--out", kg.out, "output directory")->required();
  c_kg->add_option("--count", kg.count, "number of kernels");
  c_kg->add_option("--sizes", kg.sizes, "size range lo..hi or list a,b,c (odd, 11-31)");
  c_kg->add_option("--seed", kg.seed, "random seed");
  c_kg->add_option("--steps", kg.steps, "trajectory length (default 2000*side/31)");
  c_kg->add_option("--inertia", kg.inertia, "velocity inertia in [0,1]");
  c_kg->add_option("--shake", kg.shake, "per-step shake probability");

  DegradeArgs dg;
  auto* c_dg = app.add_subcommand("degrade", "build an LR dataset from HR images");
  c_dg->add_option("--hr", dg.hr, "directory of HR PNG images")->required();
  c_dg->add_option("--out", dg.out, "output directory")->required();
  c_dg->add_option("--scale", dg.scales, "scale factor(s), e.g. 2 or 2,3,4");
  c_dg->add_option("--sigma", dg.sigma, "noise level(s) in percent, e.g. 1% or 1%,2%");
  c_dg->add_option("--kernels", dg.kernels, "directory of kernel .txt files (default: synthesize)");
  c_dg->add_option("--kernel-count", dg.kernel_count, "kernels to synthesize when --kernels is absent");
  c_dg->add_option("--sizes", dg.sizes, "sizes for synthesized kernels");
  c_dg->add_option("--variant", dg.variant, "eq1 (bicubic only), eq2 (blur then down), eq3 (down then blur)");
  c_dg->add_option("--pairing", dg.pairing, "all or round-robin");
  c_dg->add_option("--crop", dg.crop, "HR center crop side");
  c_dg->add_option("--seed", dg.seed, "random seed");
  c_dg->add_option("--bit-depth", dg.bit_depth, "LR PNG bit depth (8 or 16)");

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "train a model on a dataset manifest");
  c_tr->add_option("--manifest", tr.manifest, "manifest.jsonl")->required();
  c_tr->add_option("--scale", tr.scale, "scale factor");
  c_tr->add_option("--out", tr.out, "checkpoint path")->required();
  c_tr->add_option("--log", tr.log, "epoch log (default <out>.log.jsonl)");
  c_tr->add_flag("--toy", tr.toy, "small network, 64px crops, 5 epochs");
  c_tr->add_option("--epochs", tr.epochs, "epoch count");
  c_tr->add_option("--crop", tr.crop, "HR crop side");
  c_tr->add_option("--seed", tr.seed, "random seed");
  c_tr->add_flag("--online", tr.online, "draw a fresh kernel and noise level per sample and epoch");
  c_tr->add_option("--lr", tr.lr, "learning rate");
  c_tr->add_option("--weight-decay", tr.weight_decay, "decoupled weight decay");
  c_tr->add_option("--batch", tr.batch, "samples per optimizer step");
  c_tr->add_option("--features", tr.features, "denoiser feature width");
  c_tr->add_option("--units", tr.units, "residual units");
  c_tr->add_option("--iterations", tr.iterations, "unrolled PGM iterations");
  c_tr->add_option("--stages", tr.stages, "repetitions of the iteration block");
  c_tr->add_flag("--unshared", tr.unshared, "separate denoiser weights per iteration");

  RestoreArgs rs;
  auto* c_rs = app.add_subcommand("restore", "super-resolve one LR image");
  c_rs->add_option("--lr", rs.lr, "LR PNG")->required();
  c_rs->add_option("--kernel", rs.kernel, "blur kernel .txt");
  c_rs->add_flag("--delta", rs.delta, "no blur (identity kernel)");
  c_rs->add_option("--sigma", rs.sigma, "noise level in percent");
  c_rs->add_option("--scale", rs.scale, "scale factor");
  c_rs->add_option("--ckpt", rs.ckpt, "checkpoint")->required();
  c_rs->add_option("--out", rs.out, "output PNG")->required();
  c_rs->add_option("--bit-depth", rs.bit_depth, "output bit depth (8 or 16)");

  BenchmarkArgs bm;
  auto* c_bm = app.add_subcommand("benchmark", "PSNR/SSIM table over a manifest");
  c_bm->add_option("--manifest", bm.manifest, "manifest.jsonl")->required();
  c_bm->add_option("--ckpt", bm.ckpt, "checkpoint (needed for srwdnet)");
  c_bm->add_option("--methods", bm.methods, "comma-separated: bicubic,srwdnet");
  c_bm->add_option("--out", bm.out, "report path (TSV)");
  c_bm->add_flag("--luma", bm.luma, "score the Y channel instead of RGB");

  std::string record;
  auto* c_rp = app.add_subcommand("replay", "re-run a command from its run record");
  c_rp->add_option("record", record, "run record JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail(srwd::ErrorCode::BadFlag, e.what());
  }

  if (*c_kg) cmd_kernel_gen(kg, args);
  else if (*c_dg) cmd_degrade(dg, args);
  else if (*c_tr) cmd_train(tr, args);
  else if (*c_rs) cmd_restore(rs, args);
  else if (*c_bm) cmd_benchmark(bm, args);
  else if (*c_rp) return replay(record);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const srwd::Error& e) {
    fail(e.code(), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    fail(srwd::ErrorCode::IoError, e.what());
  } catch (const std::exception& e) {
    fail(srwd::ErrorCode::IoError, e.what());
  }
}
