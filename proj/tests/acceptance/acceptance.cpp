// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only
// when every criterion passes within its time budget.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "oracles.hpp"
#include "styleid/container.hpp"
#include "styleid/latent.hpp"
#include "styleid/metrics.hpp"
#include "styleid/sample_data.hpp"
#include "styleid/toy_generator.hpp"
#include "styleid/trainer.hpp"
#include "tempdir.hpp"

using namespace styleid;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

bool bit_equal(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

LatentCode random_latent(std::size_t l, std::size_t d, oracle::Normal& rng) {
  LatentCode w(l, d);
  for (auto& v : w.values()) v = rng();
  return w;
}

// Masking identities must hold bit-exactly, affine ones to 1e-12.
Verdict mixing_algebra() {
  Verdict v;
  oracle::Normal rng(2024);
  std::size_t failures = 0;
  double worst_affine = 0.0;
  const std::size_t cases = 1000;
  for (std::size_t t = 0; t < cases; ++t) {
    const std::size_t l = 1 + t % 18;
    const std::size_t d = 1 + (7 * t) % 32;
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < l; ++k) {
      if (rng() > 0.3) idx.push_back(k);
    }
    const SwapList swap(idx);
    const LatentCode ws = random_latent(l, d, rng);
    const LatentCode full = random_latent(l, d, rng);
    LatentCode wr(l, d);
    for (auto k : idx) std::copy_n(full.row(k).begin(), d, wr.row(k).begin());
    const double a = 0.5 + 0.5 * std::tanh(rng());
    const double b = 0.5 + 0.5 * std::tanh(rng());

    bool ok = true;
    const auto parts = decouple(ws, swap);
    for (std::size_t k = 0; k < l; ++k) {
      const bool in = swap.contains(k);
      for (std::size_t j = 0; j < d; ++j) {
        ok &= parts.independent(k, j) + parts.related(k, j) == ws(k, j);
        ok &= parts.related(k, j) == (in ? ws(k, j) : 0.0);
        ok &= parts.independent(k, j) == (in ? 0.0 : ws(k, j));
      }
    }
    ok &= mix(ws, wr, {1.0, swap, t}) == ws;
    const LatentCode zero = mix(ws, wr, {0.0, swap, t});
    const LatentCode ma = mix(ws, wr, {a, swap, t});
    const LatentCode mb = mix(ws, wr, {b, swap, t});
    for (std::size_t k = 0; k < l; ++k) {
      if (!swap.contains(k)) {
        ok &= bit_equal(zero.row(k), ws.row(k)) && bit_equal(ma.row(k), ws.row(k)) &&
              bit_equal(mb.row(k), ws.row(k));
        continue;
      }
      ok &= bit_equal(zero.row(k), wr.row(k));
      for (std::size_t j = 0; j < d; ++j) {
        const double r = std::abs((ma(k, j) - mb(k, j)) - (a - b) * (ws(k, j) - wr(k, j)));
        const double direct = std::abs(ma(k, j) - (a * ws(k, j) + (1.0 - a) * wr(k, j)));
        worst_affine = std::max({worst_affine, r, direct});
      }
    }
    if (!ok) ++failures;
  }
  v.require(failures == 0, std::to_string(failures) + " cases broke a masking identity");
  v.require(worst_affine <= 1e-12, "affine residual " + fmt("%.2e", worst_affine));
  v.note(std::to_string(cases) + " cases, masking bit-exact, max affine residual " +
         fmt("%.1e", worst_affine) + " (tol 1e-12)");
  return v;
}

// Analytic vs numeric gradients on 10 generator and 10 perceptual instances.
Verdict gradient_suite() {
  Verdict v;
  constexpr double kTol = 1e-4;
  constexpr double kFloor = 1e-6;
  oracle::GradCheck gen, perc;
  for (std::uint64_t t = 0; t < 10; ++t) {
    ToyGenerator g({}, 100 + t);
    LatentCode w = g.sample_prior(200 + t);
    oracle::Normal rng(300 + t);
    Image target(g.output_shape());
    for (auto& p : target.pixels()) p = 0.5 + 0.2 * rng();
    // Pixel loss 0.5 * |G(w) - target|^2.
    auto loss = [&] {
      const Image img = g.synthesize(w);
      double acc = 0.0;
      for (std::size_t i = 0; i < img.size(); ++i) {
        const double r = img.pixels()[i] - target.pixels()[i];
        acc += 0.5 * r * r;
      }
      return acc;
    };
    Image grad_img = g.synthesize(w);
    for (std::size_t i = 0; i < grad_img.size(); ++i) grad_img.pixels()[i] -= target.pixels()[i];
    LatentCode grad_w(w.layers(), w.dim());
    std::vector<double> grad_p(g.params().size(), 0.0);
    g.backward(w, grad_img, &grad_w, grad_p);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double fd = oracle::central_difference_richardson(loss, w.values()[i], 1e-3);
      oracle::compare_entry(gen, grad_w.values()[i], fd, kFloor, "w");
    }
    auto params = g.mutable_params();
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double fd = oracle::central_difference_richardson(loss, params[i], 1e-3);
      oracle::compare_entry(gen, grad_p[i], fd, kFloor, "param " + std::to_string(i));
    }
  }
  const FeatureStack fs = FeatureStack::seeded({32, 32, 3}, 1234);
  for (std::uint64_t t = 0; t < 10; ++t) {
    oracle::Normal rng(400 + t);
    Image a({32, 32, 3}), b({32, 32, 3});
    for (auto& p : a.pixels()) p = 0.5 + 0.2 * rng();
    for (auto& p : b.pixels()) p = 0.5 + 0.2 * rng();
    Image grad;
    fs.distance(a, b, grad);
    auto loss = [&] { return fs.distance(a, b); };
    // Every 8th pixel entry, offset per instance, covers all positions
    // and channels over the 10 instances. The step stays small so it
    // rarely straddles a ReLU kink.
    for (std::size_t i = t % 8; i < a.size(); i += 8) {
      const double fd = oracle::central_difference_richardson(loss, a.pixels()[i], 1e-5);
      oracle::compare_entry(perc, grad.pixels()[i], fd, kFloor, "pixel " + std::to_string(i));
    }
  }
  v.require(gen.worst_rel < kTol, "generator worst relative error " + fmt("%.2e", gen.worst_rel) +
                                      " at " + gen.worst_where);
  v.require(perc.worst_rel < kTol, "perceptual worst relative error " + fmt("%.2e", perc.worst_rel) +
                                       " at " + perc.worst_where);
  v.note("20 instances; generator " + std::to_string(gen.compared) + " entries, worst rel " +
         fmt("%.1e", gen.worst_rel) + "; perceptual " + std::to_string(perc.compared) +
         " entries, worst rel " + fmt("%.1e", perc.worst_rel) + " (tol 1e-4)");
  return v;
}

Verdict inversion_round_trip() {
  Verdict v;
  const ToyGenerator g;
  const FeatureStack fs = FeatureStack::seeded({32, 32, 3}, 1234);
  const InversionOptions opts;
  const Image init = g.synthesize(g.mean_latent(opts.mean_samples, opts.seed));
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Image target = g.synthesize(g.sample_prior(seed));
    const double baseline = fs.distance(init, target);
    const auto res = invert(target, g, opts, fs);
    const double ratio = fs.distance(g.synthesize(res.latent), target) / baseline;
    worst = std::max(worst, ratio);
    v.require(ratio < 0.05, "seed " + std::to_string(seed) + " ratio " + fmt("%.4f", ratio));
  }
  v.note("10 latents, worst distance ratio to mean-latent baseline " + fmt("%.2e", worst) +
         " (tol 0.05)");
  return v;
}

std::string checkpoint_bytes(const Generator& g) {
  TempDir dir("acc_ckpt");
  save_checkpoint(dir / "g.sidg", g);
  std::ifstream in(dir / "g.sidg", std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Verdict training_descent() {
  Verdict v;
  const ToyGenerator g;
  const FeatureStack fs = FeatureStack::seeded({32, 32, 3}, 1234);
  const SampleSet data = make_sample_set(g, 1, 3, 0);
  TrainConfig cfg = TrainConfig::sketch_profile();
  cfg.swap = default_swap_for(g);
  const InversionOptions inv;
  const auto a = fine_tune(g, data.references, data.photos[0], cfg, fs, inv);
  const auto b = fine_tune(g, data.references, data.photos[0], cfg, fs, inv);
  const double first = a.history.epochs.front().total;
  const double last = a.history.epochs.back().total;
  v.require(a.history.size() == 150, "history length " + std::to_string(a.history.size()));
  v.require(last <= 0.5 * first, "final/initial " + fmt("%.3f", last / first));
  v.require(checkpoint_bytes(*a.generator) == checkpoint_bytes(*b.generator),
            "checkpoints of identical runs differ");
  v.note("150 epochs, n=3, swap " + cfg.swap.to_string() + ": total " + fmt("%.4f", first) +
         " -> " + fmt("%.4f", last) + " (ratio " + fmt("%.3f", last / first) +
         ", need <= 0.5); repeat run checkpoint byte-identical");
  return v;
}

struct SweepRow {
  std::string kind;
  double value = 0.0;
  double l_ref = 0.0;
  double l_feature = 0.0;
  std::string dispersion;
};

std::vector<SweepRow> parse_sweep(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    std::istringstream cells(line);
    SweepRow r;
    std::string fid;
    cells >> r.kind >> r.value >> r.l_ref >> r.l_feature >> fid >> r.dispersion;
    rows.push_back(r);
  }
  return rows;
}

// Runs through the sweep command end to end.
Verdict ablation_trends() {
  Verdict v;
  TempDir dir("acc_sweep");
  std::ostringstream out, err;
  const std::string data = (dir / "data").string();
  if (cli::run({"make-samples", "--out", data, "--photos", "1", "--refs", "14"}, out, err) != 0) {
    v.require(false, "make-samples: " + err.str());
    return v;
  }
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  const int code = cli::run({"sweep", "--refs", data + "/refs", "--input", data + "/photos/photo_00.png",
                             "--out", (dir / "sweep").string(), "--lambdas", "0.0005,0.001,0.002",
                             "--ref-counts", "1,7", "--runs-per-count", "7", "--workers",
                             std::to_string(workers)},
                            out, err);
  if (code != 0) {
    v.require(false, "sweep exited " + std::to_string(code) + ": " + err.str());
    return v;
  }
  const auto rows = parse_sweep(dir / "sweep/sweep_report.tsv");
  std::vector<double> feature;
  double disp1 = -1.0, disp7 = -1.0;
  for (const auto& r : rows) {
    if (r.kind == "lambda") feature.push_back(r.l_feature);
    if (r.kind == "refs" && r.value == 1.0) disp1 = std::stod(r.dispersion);
    if (r.kind == "refs" && r.value == 7.0) disp7 = std::stod(r.dispersion);
  }
  v.require(feature.size() == 3, "expected three lambda rows");
  if (feature.size() == 3) {
    v.require(feature[0] > feature[1] && feature[1] > feature[2], "L_feature not strictly decreasing");
    v.note("final L_feature at lambda 0.0005/0.001/0.002: " + fmt("%.5f", feature[0]) + " > " +
           fmt("%.5f", feature[1]) + " > " + fmt("%.5f", feature[2]));
  }
  v.require(disp1 >= 0.0 && disp7 >= 0.0, "dispersion rows missing");
  v.require(disp7 < disp1, "7-reference dispersion not below 1-reference dispersion");
  v.note("output dispersion 1-ref " + fmt("%.4f", disp1) + " vs 7-ref " + fmt("%.4f", disp7) +
         " (7 runs each, 14-image pool)");
  return v;
}

GaussianStats make_stats(std::vector<double> mean, std::vector<double> cov) {
  GaussianStats s;
  s.mean = std::move(mean);
  s.cov = std::move(cov);
  s.count = 2;
  return s;
}

Verdict fid_oracles() {
  Verdict v;
  double self = 0.0, ident = 0.0, diag = 0.0, sqrt_err = 0.0, asym = 0.0;
  oracle::Normal rng(77);
  for (std::size_t k : {1u, 2u, 3u, 8u, 16u, 32u, 48u, 64u}) {
    const auto sa = oracle::random_spd(k, 1000 + k, 1e-3, 5.0);
    const auto sb = oracle::random_spd(k, 2000 + k, 1e-3, 5.0);
    std::vector<double> ma(k), mb(k), d(k), s1(k), s2(k);
    for (auto& x : ma) x = rng();
    for (auto& x : mb) x = rng();
    double d2 = 0.0;
    for (auto& x : d) {
      x = rng();
      d2 += x * x;
    }
    const auto a = make_stats(ma, sa);
    const auto b = make_stats(mb, sb);
    self = std::max(self, std::abs(frechet_distance(a, a)));
    asym = std::max(asym, std::abs(frechet_distance(a, b) - frechet_distance(b, a)));

    std::vector<double> eye(k * k, 0.0), da(k * k, 0.0), db(k * k, 0.0);
    double diag_expected = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      eye[i * k + i] = 1.0;
      s1[i] = 0.2 + std::abs(rng());
      s2[i] = 0.2 + std::abs(rng());
      da[i * k + i] = s1[i] * s1[i];
      db[i * k + i] = s2[i] * s2[i];
      diag_expected += (s1[i] - s2[i]) * (s1[i] - s2[i]);
    }
    ident = std::max(ident, std::abs(frechet_distance(make_stats(ma, eye), make_stats(
                                         [&] {
                                           std::vector<double> m = ma;
                                           for (std::size_t i = 0; i < k; ++i) m[i] += d[i];
                                           return m;
                                         }(),
                                         eye)) -
                                     d2));
    diag = std::max(diag, std::abs(frechet_distance(make_stats(ma, da), make_stats(ma, db)) - diag_expected));

    const auto r = sqrtm_psd(sa, k);
    const auto sq = oracle::matmul(r, r, k);
    std::vector<double> diff(sa.size());
    for (std::size_t i = 0; i < sa.size(); ++i) diff[i] = sq[i] - sa[i];
    sqrt_err = std::max(sqrt_err, oracle::frobenius(diff) / oracle::frobenius(sa));
  }
  v.require(self <= 1e-6, "d(a,a) " + fmt("%.2e", self));
  v.require(ident <= 1e-8, "identity closed form " + fmt("%.2e", ident));
  v.require(diag <= 1e-8, "diagonal closed form " + fmt("%.2e", diag));
  v.require(sqrt_err < 1e-6, "sqrt reconstruction " + fmt("%.2e", sqrt_err));
  v.require(asym < 1e-8, "asymmetry " + fmt("%.2e", asym));
  v.note("K up to 64: d(a,a) " + fmt("%.1e", self) + ", identity " + fmt("%.1e", ident) +
         ", diagonal " + fmt("%.1e", diag) + ", sqrtm rel " + fmt("%.1e", sqrt_err) +
         ", |d(a,b)-d(b,a)| " + fmt("%.1e", asym));
  return v;
}

Verdict ssim_oracles() {
  Verdict v;
  oracle::Normal rng(5);
  bool self_exact = true;
  for (std::size_t t = 0; t < 20; ++t) {
    Image img({24, 20, 3});
    for (auto& p : img.pixels()) p = std::clamp(0.5 + 0.3 * rng(), 0.0, 1.0);
    self_exact &= ssim(img, img) == 1.0;
  }
  double const_err = 0.0;
  for (double m1 : {0.0, 0.1, 0.35, 0.5, 0.8, 1.0}) {
    for (double m2 : {0.05, 0.5, 0.75, 1.0}) {
      const double got = ssim(Image({16, 16, 3}, m1), Image({16, 16, 3}, m2));
      const_err = std::max(const_err, std::abs(got - oracle::ssim_constant(m1, m2, 0.01, 1.0)));
    }
  }
  double lo = 1.0, hi = -1.0;
  for (std::size_t t = 0; t < 100; ++t) {
    Image a({16, 16, 3}), b({16, 16, 3});
    for (auto& p : a.pixels()) p = std::clamp(0.5 + 0.3 * rng(), 0.0, 1.0);
    for (std::size_t i = 0; i < b.size(); ++i) {
      // Mix of independent, correlated and anti-correlated pairs.
      const double noise = std::clamp(0.5 + 0.3 * rng(), 0.0, 1.0);
      b.pixels()[i] = t % 3 == 0 ? noise : t % 3 == 1 ? 0.7 * a.pixels()[i] + 0.3 * noise : 1.0 - a.pixels()[i];
    }
    const double s = ssim(a, b);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  v.require(self_exact, "ssim(x, x) != 1");
  v.require(const_err <= 1e-10, "constant closed form " + fmt("%.2e", const_err));
  v.require(lo >= -1.0 && hi <= 1.0, "out of bounds");
  v.note("self exactly 1 on 20 images; constant-image error " + fmt("%.1e", const_err) +
         " (tol 1e-10); 100 pairs in [" + fmt("%.3f", lo) + ", " + fmt("%.3f", hi) + "]");
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Verdict cli_replay() {
  Verdict v;
  TempDir dir("acc_cli");
  auto run = [](std::vector<std::string> args) {
    std::ostringstream out, err;
    return cli::run(args, out, err);
  };
  const std::string data = (dir / "data").string();
  const std::string photo = data + "/photos/photo_00.png";
  v.require(run({"make-samples", "--out", data, "--refs", "3"}) == 0, "make-samples");
  v.require(run({"train", "--refs", data + "/refs", "--input", photo, "--out", (dir / "run").string(),
                 "--epochs", "40"}) == 0,
            "train");
  v.require(run({"replay", "--manifest", (dir / "run/manifest.json").string(), "--out",
                 (dir / "rerun").string()}) == 0,
            "train replay");
  for (const char* f : {"checkpoint.sidg", "history.log", "preview.png"}) {
    v.require(slurp(dir / "run" / f) == slurp(dir / "rerun" / f), std::string(f) + " differs");
  }
  v.require(run({"stylize", "--checkpoint", (dir / "run/checkpoint.sidg").string(), "--input", photo,
                 "--out", (dir / "styled.png").string()}) == 0,
            "stylize");
  v.require(run({"replay", "--manifest", (dir / "styled.png.manifest.json").string(), "--out",
                 (dir / "restyled").string()}) == 0,
            "stylize replay");
  v.require(slurp(dir / "styled.png") == slurp(dir / "restyled/styled.png"), "stylized image differs");
  v.require(run({"invert", "--input", photo, "--out", (dir / "photo.sidl").string()}) == 0, "invert");
  v.require(run({"replay", "--manifest", (dir / "photo.sidl.manifest.json").string(), "--out",
                 (dir / "reinverted").string()}) == 0,
            "invert replay");
  v.require(slurp(dir / "photo.sidl") == slurp(dir / "reinverted/photo.sidl"), "inverted latent differs");

  // Documented exit codes.
  const int usage = run({"train", "--input", photo, "--out", (dir / "x").string()});
  const int io = run({"train", "--refs", (dir / "missing").string(), "--input", photo, "--out",
                      (dir / "x").string()});
  const int numerical = run({"train", "--refs", data + "/refs", "--input", photo, "--out",
                             (dir / "boom").string(), "--epochs", "3", "--step-size", "1e300"});
  std::string json = slurp(dir / "run/manifest.json");
  const auto at = json.find("\"sha256\"", json.find("\"outputs\""));
  const auto quote = json.find('"', json.find(':', at) + 1);
  json[quote + 1] = json[quote + 1] == 'a' ? 'b' : 'a';
  std::ofstream(dir / "tampered.json") << json;
  const int diverged = run({"replay", "--manifest", (dir / "tampered.json").string(), "--out",
                            (dir / "tampered_run").string()});
  v.require(usage == 2, "usage exit " + std::to_string(usage));
  v.require(io == 3, "I/O exit " + std::to_string(io));
  v.require(numerical == 4, "numerical exit " + std::to_string(numerical));
  v.require(diverged == 4, "divergent replay exit " + std::to_string(diverged));
  v.note("train, stylize and invert replays byte-identical; exit codes 0/2/3/4 observed (" +
         std::to_string(usage) + "/" + std::to_string(io) + "/" + std::to_string(numerical) +
         ", divergent replay " + std::to_string(diverged) + ")");
  return v;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Verdict()> run;
};

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const std::vector<Criterion> criteria{
      {1, "latent mixing algebra", 5, mixing_algebra},
      {2, "gradient suite", 30, gradient_suite},
      {3, "inversion round trip", 120, inversion_round_trip},
      {4, "training descent + determinism", 180, training_descent},
      {5, "ablation trends", 600, ablation_trends},
      {6, "FID oracles", 10, fid_oracles},
      {7, "SSIM oracles", 10, ssim_oracles},
      {8, "CLI replay + exit codes", 120, cli_replay},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.require(secs < c.budget_seconds, "time budget");
    if (!v.pass) ++failed;
    std::printf("%s  [%d] %-32s %7.2f s / %3.0f s  %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                c.budget_seconds, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
