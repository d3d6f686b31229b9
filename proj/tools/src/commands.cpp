#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "dataset.hpp"
#include "styleid/container.hpp"
#include "styleid/errors.hpp"
#include "styleid/metrics.hpp"
#include "styleid/png_io.hpp"
#include "styleid/rng.hpp"
#include "styleid/sample_data.hpp"
#include "styleid/trainer.hpp"

namespace styleid::cli {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

// Loaded backend, perceptual stack and the input files they came from.
struct Context {
  std::unique_ptr<Generator> generator;
  std::unique_ptr<FeatureStack> perc;
  std::vector<FileDigest> inputs;

  void record_input(const fs::path& p) { inputs.push_back({p.string(), sha256_file(p)}); }
};

Context load_context(const Settings& s) {
  Context ctx;
  const std::string backend = s.get("backend");
  ctx.generator = make_backend(backend);
  if (backend.rfind("checkpoint:", 0) == 0) ctx.record_input(backend.substr(11));
  const ImageShape shape = ctx.generator->output_shape();
  const auto weights = s.find("perc_weights");
  if (weights && !weights->empty()) {
    ctx.perc = std::make_unique<FeatureStack>(FeatureStack::load(*weights));
    ctx.record_input(*weights);
    if (ctx.perc->input_shape() != shape) {
      throw UsageError("perceptual weights expect " + ctx.perc->input_shape().to_string() +
                       " images, backend produces " + shape.to_string());
    }
  } else {
    ctx.perc = std::make_unique<FeatureStack>(FeatureStack::seeded(shape, s.get_u64("perc_seed")));
  }
  return ctx;
}

std::string require_path(const Settings& s, const std::string& key, const std::string& flag) {
  auto v = s.find(key);
  if (!v || v->empty()) throw UsageError("missing required " + flag);
  return *v;
}

std::vector<Image> load_image_dir(Context& ctx, const fs::path& dir) {
  std::vector<Image> images;
  for (const auto& p : list_pngs(dir)) {
    images.push_back(load_fitted(p, ctx.generator->output_shape()));
    ctx.record_input(p);
  }
  if (images.empty()) throw UsageError("no PNG images in " + dir.string());
  return images;
}

Image load_image_file(Context& ctx, const fs::path& path) {
  Image img = load_fitted(path, ctx.generator->output_shape());
  ctx.record_input(path);
  return img;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out || !(out << text)) throw IoError("cannot write " + path.string());
}

RunManifest start_manifest(const std::string& command, const Settings& s) {
  RunManifest m;
  m.tool_version = tool_version();
  m.command = command;
  m.settings = s;
  m.backend = s.get("backend");
  m.train_seed = s.has("seed") ? s.get_u64("seed") : 0;
  m.inversion_seed = s.get_u64("inv_seed");
  m.perceptual_seed = s.get_u64("perc_seed");
  m.started_utc = utc_timestamp();
  return m;
}

void finish_manifest(RunManifest& m, const Context& ctx, const fs::path& base,
                     const std::vector<std::string>& outputs, Clock::time_point t0,
                     const fs::path& manifest_path) {
  m.inputs = ctx.inputs;
  for (const auto& name : outputs) m.outputs.push_back({name, sha256_file(base / name)});
  m.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  m.save(manifest_path);
}

fs::path prepare_out_dir(const Settings& s) {
  const fs::path dir = require_path(s, "out", "--out");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::vector<double> parse_double_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw UsageError(std::string("cannot parse ") + what + " entry '" + item + "'");
    }
  }
  return out;
}

Image montage(const std::vector<Image>& tiles) {
  constexpr std::size_t kGap = 2;
  const ImageShape t = tiles.front().shape();
  Image out({t.height, tiles.size() * (t.width + kGap) - kGap, t.channels}, 1.0);
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    for (std::size_t y = 0; y < t.height; ++y) {
      for (std::size_t x = 0; x < t.width; ++x) {
        for (std::size_t c = 0; c < t.channels; ++c) {
          out.at(y, i * (t.width + kGap) + x, c) = tiles[i].at(y, x, c);
        }
      }
    }
  }
  return out;
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

RunManifest execute_train(const Settings& s, std::ostream& out) {
  const auto t0 = Clock::now();
  const std::string refs_dir = require_path(s, "refs", "--refs");
  const std::string input = require_path(s, "input", "--input");
  const fs::path out_dir = prepare_out_dir(s);

  Context ctx = load_context(s);
  const TrainConfig cfg = train_config_from(s, *ctx.generator);
  const InversionOptions inv = inversion_options_from(s);
  const std::vector<Image> refs = load_image_dir(ctx, refs_dir);
  const Image photo = load_image_file(ctx, input);

  Settings resolved = s;
  resolved.set("swap_list", effective_swap(cfg, *ctx.generator).to_string());
  resolved.set("epochs", std::to_string(cfg.epochs));
  RunManifest m = start_manifest("train", resolved);

  const TrainResult res = fine_tune(*ctx.generator, refs, photo, cfg, *ctx.perc, inv);
  save_checkpoint(out_dir / "checkpoint.sidg", *res.generator);
  write_text(out_dir / "history.log", res.history.to_log());
  save_png(out_dir / "preview.png", stylize(*res.generator, *ctx.generator, photo, inv, *ctx.perc));

  finish_manifest(m, ctx, out_dir, {"checkpoint.sidg", "history.log", "preview.png"}, t0,
                  out_dir / "manifest.json");
  if (!res.history.epochs.empty()) {
    const auto& first = res.history.epochs.front();
    const auto& last = res.history.epochs.back();
    out << "epochs " << res.history.size() << " refs " << refs.size() << " total "
        << format_value(first.total) << " -> " << format_value(last.total) << "\n";
  } else {
    out << "epochs 0 refs " << refs.size() << "\n";
  }
  out << "wrote " << out_dir.string() << "\n";
  return m;
}

RunManifest execute_invert(const Settings& s, std::ostream& out) {
  const auto t0 = Clock::now();
  const std::string input = require_path(s, "input", "--input");
  const fs::path out_file = require_path(s, "out", "--out");
  Context ctx = load_context(s);
  const InversionOptions inv = inversion_options_from(s);
  const Image target = load_image_file(ctx, input);
  RunManifest m = start_manifest("invert", s);

  const InversionResult res = invert(target, *ctx.generator, inv, *ctx.perc);
  save_latent(out_file, res.latent);
  finish_manifest(m, ctx, out_file.parent_path(), {out_file.filename().string()}, t0,
                  out_file.string() + ".manifest.json");
  out << "final_loss " << format_value(res.final_loss) << "\n";
  return m;
}

RunManifest execute_stylize(const Settings& s, std::ostream& out) {
  const auto t0 = Clock::now();
  const std::string input = require_path(s, "input", "--input");
  const std::string checkpoint = require_path(s, "checkpoint", "--checkpoint");
  const fs::path out_file = require_path(s, "out", "--out");
  Context ctx = load_context(s);
  const InversionOptions inv = inversion_options_from(s);
  const auto trained = load_checkpoint(checkpoint);
  ctx.record_input(checkpoint);
  const Image photo = load_image_file(ctx, input);
  RunManifest m = start_manifest("stylize", s);

  const Image result = stylize(*trained, *ctx.generator, photo, inv, *ctx.perc);
  save_png(out_file, result);
  finish_manifest(m, ctx, out_file.parent_path(), {out_file.filename().string()}, t0,
                  out_file.string() + ".manifest.json");
  out << "perc_to_input " << format_value(ctx.perc->distance(result, photo)) << "\n";
  return m;
}

RunManifest execute_sweep(const Settings& s, std::ostream& out) {
  const auto t0 = Clock::now();
  const std::vector<double> lambdas = parse_double_list(s.find("lambdas").value_or(""), "--lambdas");
  std::vector<std::size_t> counts;
  for (double c : parse_double_list(s.find("ref_counts").value_or(""), "--ref-counts")) {
    if (c < 1 || c != static_cast<double>(static_cast<std::size_t>(c))) {
      throw UsageError("reference counts must be positive integers");
    }
    counts.push_back(static_cast<std::size_t>(c));
  }
  if (lambdas.empty() && counts.empty()) {
    throw UsageError("empty sweep grid: pass --lambdas and/or --ref-counts");
  }
  const std::string refs_dir = require_path(s, "refs", "--refs");
  const std::string input = require_path(s, "input", "--input");
  const fs::path out_dir = prepare_out_dir(s);

  Context ctx = load_context(s);
  const TrainConfig base_cfg = train_config_from(s, *ctx.generator);
  const InversionOptions inv = inversion_options_from(s);
  const std::vector<Image> pool = load_image_dir(ctx, refs_dir);
  const Image photo = load_image_file(ctx, input);
  std::vector<Image> eval_photos;
  if (auto dir = s.find("eval_photos"); dir && !dir->empty()) eval_photos = load_image_dir(ctx, *dir);
  const std::size_t runs_per_count = s.has("runs_per_count") ? s.get_u64("runs_per_count") : 7;
  if (runs_per_count < 2) throw UsageError("--runs-per-count must be at least 2");
  for (auto c : counts) {
    if (c > pool.size()) {
      throw UsageError("reference count " + std::to_string(c) + " exceeds the " +
                       std::to_string(pool.size()) + " available references");
    }
  }

  // One job per training run; results land at a fixed index.
  struct Job {
    double lambda;
    std::vector<std::size_t> subset;
  };
  struct JobResult {
    EpochLoss final_loss;
    Image output;
    std::vector<Image> eval_outputs;
  };
  struct Point {
    std::string kind;
    std::string value;
    std::size_t first_job;
    std::size_t job_count;
    std::vector<std::size_t> ref_subset;
  };
  std::vector<Job> jobs;
  std::vector<Point> points;
  std::vector<std::size_t> all(pool.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  for (double lam : lambdas) {
    if (lam < 0) throw UsageError("lambda values must be non-negative");
    points.push_back({"lambda", format_value(lam), jobs.size(), 1, all});
    jobs.push_back({lam, all});
  }
  for (std::size_t k : counts) {
    const std::size_t runs = std::min(runs_per_count, pool.size());
    points.push_back({"refs", std::to_string(k), jobs.size(), runs, {}});
    for (std::size_t r = 0; r < runs; ++r) {
      Job job{base_cfg.lambda_feature, {}};
      for (std::size_t j = 0; j < k; ++j) job.subset.push_back((r + j) % pool.size());
      if (r == 0) points.back().ref_subset = job.subset;
      jobs.push_back(std::move(job));
    }
  }

  std::vector<JobResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      TrainConfig cfg = base_cfg;
      cfg.lambda_feature = jobs[i].lambda;
      std::vector<Image> refs;
      for (auto idx : jobs[i].subset) refs.push_back(pool[idx]);
      const TrainResult res = fine_tune(*ctx.generator, refs, photo, cfg, *ctx.perc, inv);
      JobResult& r = results[i];
      if (!res.history.epochs.empty()) r.final_loss = res.history.epochs.back();
      r.output = stylize(*res.generator, *ctx.generator, photo, inv, *ctx.perc);
      for (const auto& p : eval_photos) {
        r.eval_outputs.push_back(stylize(*res.generator, *ctx.generator, p, inv, *ctx.perc));
      }
    }
  };
  const std::size_t workers =
      std::clamp<std::size_t>(s.has("workers") ? s.get_u64("workers") : 1, 1, jobs.size());
  {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::jthread> threads;
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          worker();
        } catch (...) {
          errors[w] = std::current_exception();
          next = jobs.size();
        }
      });
    }
    threads.clear();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::ostringstream table;
  table << "kind\tvalue\tL_ref\tL_feature\tFID\tdispersion\n";
  std::vector<Image> tiles{photo};
  for (const auto& pt : points) {
    const JobResult& first = results[pt.first_job];
    std::string fid = "-";
    if (eval_photos.size() >= 2 && pt.ref_subset.size() >= 2) {
      std::vector<Image> refs;
      for (auto idx : pt.ref_subset) refs.push_back(pool[idx]);
      fid = format_value(fid_score(first.eval_outputs, refs, *ctx.perc));
    }
    std::string dispersion = "-";
    if (pt.job_count >= 2) {
      double acc = 0.0;
      std::size_t pairs = 0;
      for (std::size_t a = 0; a < pt.job_count; ++a) {
        for (std::size_t b = a + 1; b < pt.job_count; ++b) {
          acc += ctx.perc->distance(results[pt.first_job + a].output,
                                    results[pt.first_job + b].output);
          ++pairs;
        }
      }
      dispersion = format_value(acc / static_cast<double>(pairs));
    }
    table << pt.kind << '\t' << pt.value << '\t' << format_value(first.final_loss.ref) << '\t'
          << format_value(first.final_loss.feature) << '\t' << fid << '\t' << dispersion << '\n';
    tiles.push_back(first.output);
  }

  Settings resolved = s;
  resolved.set("swap_list", effective_swap(base_cfg, *ctx.generator).to_string());
  resolved.set("epochs", std::to_string(base_cfg.epochs));
  RunManifest m = start_manifest("sweep", resolved);
  write_text(out_dir / "sweep_report.tsv", table.str());
  save_png(out_dir / "montage.png", montage(tiles));
  finish_manifest(m, ctx, out_dir, {"sweep_report.tsv", "montage.png"}, t0,
                  out_dir / "manifest.json");
  out << table.str();
  return m;
}

namespace {

int run_eval(const Settings& s, bool with_ssim, std::size_t window, std::ostream& out,
             std::ostream& err) {
  const std::string dir_a = require_path(s, "a", "--a");
  const std::string dir_b = require_path(s, "b", "--b");
  Context ctx = load_context(s);
  const ImageShape shape = ctx.perc->input_shape();

  const auto files_a = list_pngs(dir_a);
  const auto files_b = list_pngs(dir_b);
  if (files_a.empty() || files_b.empty()) {
    throw UsageError("eval needs PNG images in both directories");
  }
  std::vector<Image> set_a, set_b;
  for (const auto& p : files_a) set_a.push_back(load_fitted(p, shape));
  for (const auto& p : files_b) set_b.push_back(load_fitted(p, shape));

  if (set_a.size() >= 2 && set_b.size() >= 2) {
    const double fid = fid_score(set_a, set_b, *ctx.perc);
    out << "fid " << format_value(fid) << " n_a=" << set_a.size() << " n_b=" << set_b.size()
        << " extractor=" << ctx.perc->id() << " seed=" << s.get("perc_seed") << "\n";
  } else {
    err << "warning: FID needs at least two images per set; skipped\n";
  }

  if (with_ssim) {
    std::map<std::string, std::size_t> by_name;
    for (std::size_t i = 0; i < files_b.size(); ++i) by_name[files_b[i].filename().string()] = i;
    double acc = 0.0;
    std::size_t pairs = 0;
    SsimOptions opts;
    opts.window = window;
    for (std::size_t i = 0; i < files_a.size(); ++i) {
      auto it = by_name.find(files_a[i].filename().string());
      if (it == by_name.end()) {
        err << "warning: no counterpart for " << files_a[i].filename().string() << "; skipped\n";
        continue;
      }
      acc += ssim(set_a[i], set_b[it->second], opts);
      ++pairs;
      by_name.erase(it);
    }
    for (const auto& [name, idx] : by_name) {
      err << "warning: no counterpart for " << name << "; skipped\n";
    }
    if (pairs > 0) {
      out << "ssim " << format_value(acc / static_cast<double>(pairs)) << " pairs=" << pairs
          << " window=" << window << "\n";
    } else {
      err << "warning: no paired file names; SSIM skipped\n";
    }
  }
  return kOk;
}

int run_make_samples(const Settings& s, std::size_t photos, std::size_t refs, bool eval_sets,
                     std::ostream& out) {
  const fs::path dir = prepare_out_dir(s);
  const auto g = make_backend(s.get("backend"));
  const std::uint64_t seed = s.get_u64("seed");
  const SampleSet set = make_sample_set(*g, photos, refs, seed);
  fs::create_directories(dir / "photos");
  fs::create_directories(dir / "refs");
  char name[64];
  for (std::size_t i = 0; i < set.photos.size(); ++i) {
    std::snprintf(name, sizeof name, "photo_%02zu.png", i);
    save_png(dir / "photos" / name, set.photos[i]);
  }
  for (std::size_t i = 0; i < set.references.size(); ++i) {
    std::snprintf(name, sizeof name, "ref_%02zu.png", i);
    save_png(dir / "refs" / name, set.references[i]);
  }
  if (eval_sets) {
    const ImageShape shape = g->output_shape();
    const double mean_a[] = {0.30, 0.50, 0.70};
    const double mean_b[] = {0.60, 0.40, 0.45};
    const auto a = make_constant_noise_set(shape, 512, mean_a, 0.02, 0.05, derive_seed(seed, 1));
    const auto b = make_constant_noise_set(shape, 512, mean_b, 0.04, 0.05, derive_seed(seed, 2));
    fs::create_directories(dir / "eval_a");
    fs::create_directories(dir / "eval_b");
    for (std::size_t i = 0; i < a.size(); ++i) {
      std::snprintf(name, sizeof name, "img_%03zu.png", i);
      save_png(dir / "eval_a" / name, a[i]);
      save_png(dir / "eval_b" / name, b[i]);
    }
    linear_probe_stack(shape, 4, seed).save(dir / "linear_probe.sidg");
  }
  out << "wrote " << set.photos.size() << " photos and " << set.references.size()
      << " references to " << dir.string() << "\n";
  return kOk;
}

// Binds string-valued flags to settings keys; only flags given on the
// command line end up in collected().
class FlagSet {
 public:
  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto* opt = app->add_option(flag, storage_[key], help);
    bound_.emplace_back(key, opt);
  }

  Settings collected() const {
    Settings s;
    for (const auto& [key, opt] : bound_) {
      if (opt->count() > 0) s.set(key, storage_.at(key));
    }
    return s;
  }

 private:
  std::map<std::string, std::string> storage_;
  std::vector<std::pair<std::string, CLI::Option*>> bound_;
};

void add_model_flags(CLI::App* app, FlagSet& flags) {
  flags.add(app, "--backend", "backend", "toy, toy:SEED or checkpoint:PATH");
  flags.add(app, "--seed", "seed", "Run seed (STYLEID_SEED overrides the config file)");
  flags.add(app, "--inv-steps", "inv_steps", "Inversion gradient steps");
  flags.add(app, "--inv-step-size", "inv_step_size", "Inversion step size");
  flags.add(app, "--inv-perceptual-weight", "inv_perceptual_weight", "Inversion perceptual weight");
  flags.add(app, "--inv-pixel-weight", "inv_pixel_weight", "Inversion pixel MSE weight");
  flags.add(app, "--inv-seed", "inv_seed", "Seed for the mean-latent initialization");
  flags.add(app, "--inv-mean-samples", "inv_mean_samples", "Prior samples in the mean latent");
  flags.add(app, "--perc-seed", "perc_seed", "Seed of the built-in perceptual stack");
  flags.add(app, "--perc-weights", "perc_weights", "External perceptual weights (SIDG1)");
}

void add_train_flags(CLI::App* app, FlagSet& flags) {
  add_model_flags(app, flags);
  flags.add(app, "--alpha", "alpha", "Mixing weight of the reference style rows");
  flags.add(app, "--swap-list", "swap_list", "Style layer indices, e.g. 7,9,11");
  flags.add(app, "--lambda-feature", "lambda_feature", "Identity (feature) loss weight");
  flags.add(app, "--epochs", "epochs", "Fine-tuning epochs (default from --profile)");
  flags.add(app, "--step-size", "step_size", "Fine-tuning gradient step");
  flags.add(app, "--profile", "profile", "sketch (150 epochs) or cartoon (500 epochs)");
  flags.add(app, "--refs", "refs", "Directory of reference style PNGs");
  flags.add(app, "--input", "input", "Input photo PNG");
  flags.add(app, "--out", "out", "Output directory");
}

Settings resolve(const FlagSet& flags, const std::string& config_path, bool no_resample) {
  Settings s = Settings::defaults();
  if (!config_path.empty()) s.merge(Settings::from_file(config_path));
  apply_seed_env(s);
  s.merge(flags.collected());
  if (no_resample) s.set("resample_rand", "false");
  return s;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Few-shot portrait stylization with latent style mixing and identity loss"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());

  std::string config_path;
  bool no_resample = false;

  FlagSet train_flags;
  auto* train = app.add_subcommand("train", "Fine-tune a generator on a few style references");
  add_train_flags(train, train_flags);
  train->add_option("--config", config_path, "key=value config file");
  train->add_flag("--no-resample", no_resample, "Draw one random style for all epochs");

  FlagSet sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "Lambda / reference-count ablation grid");
  add_train_flags(sweep, sweep_flags);
  sweep->add_option("--config", config_path, "key=value config file");
  sweep->add_flag("--no-resample", no_resample, "Draw one random style for all epochs");
  sweep_flags.add(sweep, "--lambdas", "lambdas", "Comma-separated lambda_feature values");
  sweep_flags.add(sweep, "--ref-counts", "ref_counts", "Comma-separated reference counts");
  sweep_flags.add(sweep, "--runs-per-count", "runs_per_count", "Runs per reference count (default 7)");
  sweep_flags.add(sweep, "--workers", "workers", "Parallel training runs");
  sweep_flags.add(sweep, "--eval-photos", "eval_photos", "Photos to stylize for FID");

  FlagSet invert_flags;
  auto* inv = app.add_subcommand("invert", "Recover a latent for an image");
  add_model_flags(inv, invert_flags);
  inv->add_option("--config", config_path, "key=value config file");
  invert_flags.add(inv, "--input", "input", "Image to invert (PNG)");
  invert_flags.add(inv, "--out", "out", "Output latent file (SIDL1)");

  FlagSet stylize_flags;
  auto* sty = app.add_subcommand("stylize", "Render a photo with a fine-tuned checkpoint");
  add_model_flags(sty, stylize_flags);
  sty->add_option("--config", config_path, "key=value config file");
  stylize_flags.add(sty, "--checkpoint", "checkpoint", "Fine-tuned checkpoint (SIDG1)");
  stylize_flags.add(sty, "--input", "input", "Input photo PNG");
  stylize_flags.add(sty, "--out", "out", "Output PNG");

  FlagSet eval_flags;
  bool no_ssim = false;
  std::size_t window = 7;
  auto* ev = app.add_subcommand("eval", "FID and paired SSIM between two image directories");
  eval_flags.add(ev, "--a", "a", "First image directory");
  eval_flags.add(ev, "--b", "b", "Second image directory");
  eval_flags.add(ev, "--backend", "backend", "Backend defining the working resolution");
  eval_flags.add(ev, "--perc-seed", "perc_seed", "Seed of the built-in feature extractor");
  eval_flags.add(ev, "--perc-weights", "perc_weights", "External extractor weights (SIDG1)");
  ev->add_flag("--no-ssim", no_ssim, "Skip SSIM");
  ev->add_option("--ssim-window", window, "SSIM window (odd)");

  std::string manifest_path;
  std::string replay_out;
  auto* rep = app.add_subcommand("replay", "Re-run a recorded manifest and compare outputs");
  rep->add_option("--manifest", manifest_path, "manifest.json of a previous run")->required();
  rep->add_option("--out", replay_out, "Output location (default: <original>-replay)");

  FlagSet sample_flags;
  std::size_t n_photos = 1;
  std::size_t n_refs = 3;
  bool eval_sets = false;
  auto* smp = app.add_subcommand("make-samples", "Write the procedural sample dataset");
  sample_flags.add(smp, "--backend", "backend", "Generator used to render samples");
  sample_flags.add(smp, "--seed", "seed", "Sample seed");
  sample_flags.add(smp, "--out", "out", "Output directory");
  smp->add_option("--photos", n_photos, "Number of photos");
  smp->add_option("--refs", n_refs, "Number of references");
  smp->add_flag("--eval-sets", eval_sets, "Also write synthetic FID sets and a linear probe");

  FlagSet export_flags;
  auto* exp = app.add_subcommand("export-backend", "Save a backend's weights as SIDG1");
  export_flags.add(exp, "--backend", "backend", "toy, toy:SEED or checkpoint:PATH");
  export_flags.add(exp, "--out", "out", "Output checkpoint file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << tool_version() << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  if (train->parsed()) {
    execute_train(resolve(train_flags, config_path, no_resample), out);
  } else if (sweep->parsed()) {
    execute_sweep(resolve(sweep_flags, config_path, no_resample), out);
  } else if (inv->parsed()) {
    execute_invert(resolve(invert_flags, config_path, false), out);
  } else if (sty->parsed()) {
    execute_stylize(resolve(stylize_flags, config_path, false), out);
  } else if (ev->parsed()) {
    return run_eval(resolve(eval_flags, "", false), !no_ssim, window, out, err);
  } else if (rep->parsed()) {
    return execute_replay(manifest_path, replay_out, out, err);
  } else if (smp->parsed()) {
    return run_make_samples(resolve(sample_flags, "", false), n_photos, n_refs, eval_sets, out);
  } else if (exp->parsed()) {
    const Settings s = resolve(export_flags, "", false);
    save_checkpoint(require_path(s, "out", "--out"), *make_backend(s.get("backend")));
  }
  return kOk;
}

}  // namespace

int execute_replay(const fs::path& manifest_path, const fs::path& out_location, std::ostream& out,
                   std::ostream& err) {
  const RunManifest m = RunManifest::load(manifest_path);
  if (m.tool_version != tool_version()) {
    err << "warning: manifest written by styleid " << m.tool_version << ", replaying with "
        << tool_version() << "; outputs may differ\n";
  }
  for (const auto& in : m.inputs) {
    if (sha256_file(in.path) != in.sha256) {
      throw IoError("input changed since the recorded run: " + in.path);
    }
  }

  Settings s = m.settings;
  const fs::path original = s.get("out");
  const bool file_output = m.command == "invert" || m.command == "stylize";
  fs::path base;
  if (file_output) {
    fs::path dir = out_location.empty() ? fs::path(original.parent_path().string() + "-replay")
                                        : out_location;
    if (dir.empty()) dir = "replay";
    fs::create_directories(dir);
    s.set("out", (dir / original.filename()).string());
    base = dir;
  } else {
    base = out_location.empty() ? fs::path(original.string() + "-replay") : out_location;
    s.set("out", base.string());
  }

  std::ostringstream sink;
  if (m.command == "train") {
    execute_train(s, sink);
  } else if (m.command == "sweep") {
    execute_sweep(s, sink);
  } else if (m.command == "invert") {
    execute_invert(s, sink);
  } else if (m.command == "stylize") {
    execute_stylize(s, sink);
  } else {
    throw UsageError("manifest has unknown command '" + m.command + "'");
  }

  std::size_t mismatches = 0;
  for (const auto& o : m.outputs) {
    const std::string now = sha256_file(base / o.path);
    const bool same = now == o.sha256;
    out << (same ? "identical " : "DIFFERS   ") << o.path << "\n";
    if (!same) ++mismatches;
  }
  if (mismatches > 0) {
    err << "error: replay diverged in " << mismatches << " output(s)\n";
    return kNumerical;
  }
  out << "replay: " << m.outputs.size() << " output(s) byte-identical\n";
  return kOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("styleid", sink);
  logger->set_pattern("%l: %v");
  auto previous = spdlog::default_logger();
  spdlog::set_default_logger(logger);
  struct Restore {
    std::shared_ptr<spdlog::logger> prev;
    ~Restore() { spdlog::set_default_logger(prev); }
  } restore{previous};

  try {
    return dispatch(args, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace styleid::cli
