// Acceptance criteria A1-A9.  Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.  Arguments select a subset, e.g. "A2 A3".

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "condgan/checkpoint.hpp"
#include "condgan/conditioning.hpp"
#include "condgan/data.hpp"
#include "condgan/errors.hpp"
#include "condgan/models.hpp"
#include "condgan/parzen.hpp"
#include "condgan/training.hpp"
#include "oracles.hpp"

using namespace condgan;
using condgan::testing::check_gradients;
using condgan::testing::random_one_hot_rows;
using condgan::testing::random_tensor;
using condgan::testing::weighted_sum;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kGradRtol = 1e-4, kGradAtol = 1e-6;
constexpr int kGradInstances = 20;
constexpr double kBilinearTol = 1e-12;
constexpr double kParzenTol = 1e-10, kPeakTol = 1e-12;
constexpr double kFitNats = 1.0, kShuffleNats = 1.0;
constexpr double kQAccuracy = 0.95, kIrganAgreement = 0.80;
constexpr std::size_t kMixtureSteps = 5000, kIrganSteps = 3000, kWindow = 200;
constexpr std::uint64_t kSeed = 7;

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path work_dir() {
  static const fs::path dir = [] {
    const auto d = fs::temp_directory_path() / "condgan_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// Runs the command-line tool in process; throws with its stderr on failure.
std::string run_cli(std::vector<std::string> args, bool with_data = true) {
  if (with_data) {
    args.push_back("--data-dir");
    args.push_back(CONDGAN_DATA_DIR);
  }
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) throw std::runtime_error(args[0] + " exited " + std::to_string(code) + ": " + err.str());
  return out.str();
}

// ---- shared training artifacts ----------------------------------------------

std::map<std::string, double> g_train_seconds;

fs::path mixture_q() {
  const auto dir = work_dir() / "mixture-q";
  if (!fs::exists(dir / "q.ckpt"))
    run_cli({"pretrain-q", "--dataset", "mixture-3x2", "--seed", std::to_string(kSeed), "--out", dir.string()});
  return dir / "q.ckpt";
}

std::vector<std::string> mixture_train_args(const std::string& variant, const fs::path& out) {
  std::vector<std::string> args{"train", "--dataset", "mixture-3x2", "--variant", variant, "--steps",
                                std::to_string(kMixtureSteps), "--seed", std::to_string(kSeed), "--progress-every", "0",
                                "--out", out.string()};
  if (variant == "irgan") {
    args.push_back("--q-checkpoint");
    args.push_back(mixture_q().string());
  }
  return args;
}

fs::path mixture_run(const std::string& variant) {
  const auto dir = work_dir() / ("mixture-" + variant);
  if (!fs::exists(dir / "g.ckpt")) {
    const auto start = Clock::now();
    run_cli(mixture_train_args(variant, dir));
    g_train_seconds[variant] = seconds_since(start);
  }
  return dir;
}

const PresetData& mixture_preset() {
  static const PresetData data = load_preset("mixture-3x2", CONDGAN_DATA_DIR);
  return data;
}

ParzenReport mixture_eval(const ConditionalSampler& sampler, const std::string& name) {
  const auto& p = mixture_preset();
  return conditional_eval(sampler, p.splits.valid, p.splits.test, ParzenConfig{}, kSeed, name);
}

const ParzenReport& oracle_baseline() {
  static const ParzenReport report = mixture_eval(oracle_sampler(mixture_preset().oracle), "oracle");
  return report;
}

// ---- A1 ----------------------------------------------------------------------

LabeledDataset grad_dataset() {
  Rng rng(1);
  Tensor images({6, 2, 2, 2});
  for (auto& v : images.data()) v = rng.uniform(-1, 1);
  return LabeledDataset(images, one_hot_rows(std::vector<std::size_t>{0, 1, 2, 0, 1, 2}, 3), {"grad", "", kTanhScale, {"a", "b", "c"}});
}

// Zero-initialized biases can leave a relu exactly at its kink.
Model jittered(Model m, Rng& rng) {
  for (auto& p : m.params)
    if (p.name.ends_with(".bias"))
      for (auto& v : p.value.data()) v = rng.uniform(-0.5, 0.5);
  return m;
}

// Parameter gradients of sum(forward) against central differences on copies.
bool param_gradients_ok(const Model& model, const std::function<Var(const Model&, const BoundParams&)>& forward,
                        std::string& detail) {
  BoundParams bound(model, true);
  backward(sum(forward(model, bound)));
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    for (std::size_t k = 0; k < model.params[i].value.size(); ++k) {
      Model hi = model, lo = model;
      hi.params[i].value[k] += 1e-5;
      lo.params[i].value[k] -= 1e-5;
      const double fh = sum(forward(hi, BoundParams(hi, false))).value().item();
      const double fl = sum(forward(lo, BoundParams(lo, false))).value().item();
      const double numeric = (fh - fl) / 2e-5;
      const auto& g = bound[i].grad();
      const double analytic = g ? (*g)[k] : 0.0;
      if (std::abs(analytic - numeric) > kGradAtol + kGradRtol * std::abs(numeric)) {
        detail = model.params[i].name + "[" + std::to_string(k) + "]: analytic " + std::to_string(analytic) +
                 " numeric " + std::to_string(numeric);
        return false;
      }
    }
  }
  return true;
}

Outcome a1() {
  Outcome o;
  Rng rng(101);
  std::map<std::string, int> passed;
  auto record = [&](const std::string& op, const testing::GradCheck& r) {
    if (r.ok) {
      ++passed[op];
    } else {
      o.fail(op + ": " + r.detail);
    }
  };
  const auto data = grad_dataset();
  for (int inst = 0; inst < kGradInstances; ++inst) {
    const std::uint64_t s = 1000 + inst;
    const Tensor a = random_tensor({3, 4}, rng, -2, 2), b = random_tensor({4, 5}, rng, -2, 2);
    record("matmul", check_gradients([&](const auto& v) { return weighted_sum(matmul(v[0], v[1]), s); }, {a, b}));
    for (const auto& act : {Activation::relu(), Activation::leaky_relu(0.2), Activation::sigmoid(), Activation::tanh()}) {
      record("activation " + act.name(),
             check_gradients([&](const auto& v) { return weighted_sum(activation(v[0], act), s); }, {a}));
    }
    const Tensor target = random_one_hot_rows(3, 4, rng);
    record("softmax_cross_entropy", check_gradients([&](const auto& v) { return softmax_cross_entropy(v[0], target); },
                                                    {random_tensor({3, 4}, rng, -3, 3)}));
    const Tensor z = random_tensor({5}, rng), c = random_tensor({3}, rng);
    record("vector_concat", check_gradients([&](const auto& v) { return weighted_sum(vector_concat(v[0], v[1]), s); }, {z, c}));
    const Tensor x = random_tensor({3, 3, 2}, rng);
    record("spatial_replicate_concat",
           check_gradients([&](const auto& v) { return weighted_sum(spatial_replicate_concat(v[0], v[1]), s); }, {x, c}));
    record("spatial_bilinear_pool",
           check_gradients([&](const auto& v) { return weighted_sum(spatial_bilinear_pool(v[0], v[1]), s); }, {x, c}));

    // Networks, with respect to inputs and to every parameter.
    const Tensor zb = random_tensor({2, 4}, rng), cb = random_tensor({2, 3}, rng, 0, 1);
    const Tensor xb = random_tensor({2, 2, 2, 2}, rng);
    const Model g = jittered(init_model(generator_config(data, default_generator_net({6, 5}), 4, s)), rng);
    record("generator", check_gradients([&](const auto& v) { return weighted_sum(generator_forward(g, BoundParams(g, false), v[0], v[1]), s); },
                                        {zb, cb}));
    std::string why;
    if (param_gradients_ok(g, [&](const Model& m, const BoundParams& p) { return weighted_sum(generator_forward(m, p, Var::constant(zb), Var::constant(cb)), s); }, why))
      ++passed["generator params"];
    else
      o.fail("generator params: " + why);
    for (Variant variant : kAllVariants) {
      auto cfg = discriminator_config(data, variant, default_discriminator_net({6, 5}), s);
      if (variant == Variant::sbp && inst % 2) cfg.sbp_depths = {0, 1, 2};
      const Model d = jittered(init_model(cfg), rng);
      const std::string name = "discriminator " + to_string(variant);
      record(name, check_gradients([&](const auto& v) { return sum(discriminator_forward(d, BoundParams(d, false), v[0], v[1])); },
                                   {xb, cb}));
      if (param_gradients_ok(d, [&](const Model& m, const BoundParams& p) { return discriminator_forward(m, p, Var::constant(xb), Var::constant(cb)); }, why))
        ++passed[name + " params"];
      else
        o.fail(name + " params: " + why);
    }
    Model q = jittered(init_model(approximator_config(data, default_approximator_net({6}), s)), rng);
    for (auto& v : q.param("layer1.weight").data()) v = rng.uniform(-1, 1);
    record("approximator", check_gradients([&](const auto& v) { return weighted_sum(approximator_forward(q, BoundParams(q, false), v[0]), s); },
                                           {xb}));
    if (param_gradients_ok(q, [&](const Model& m, const BoundParams& p) { return weighted_sum(approximator_forward(m, p, Var::constant(xb)), s); }, why))
      ++passed["approximator params"];
    else
      o.fail("approximator params: " + why);
  }
  int least = kGradInstances;
  for (const auto& [op, n] : passed) least = std::min(least, n);
  if (o.pass) o.detail = std::to_string(passed.size()) + " operations x " + std::to_string(least) + " instances";
  return o;
}

// ---- A2 ----------------------------------------------------------------------

Outcome a2() {
  Outcome o;
  Rng rng(202);
  double worst = 0;
  for (int draw = 0; draw < 1000; ++draw) {
    const std::size_t n = 1 + rng.below(4), d = 1 + rng.below(4), m = 1 + rng.below(6), a = rng.below(m);
    const Tensor xv = random_tensor({n, n, d}, rng, -3, 3), x2v = random_tensor({n, n, d}, rng, -3, 3);
    const SpatialTensor pooled = spatial_bilinear_pool(SpatialTensor(xv), ConditionVector::one_hot(a, m));
    const Tensor& sel = pooled.values();
    for (std::size_t p = 0; p < n * n; ++p)
      for (std::size_t blk = 0; blk < m; ++blk)
        for (std::size_t b = 0; b < d; ++b) {
          const double expect = blk == a ? xv[p * d + b] : 0.0;
          if (sel[p * d * m + blk * d + b] != expect) o.fail("one-hot selection not exact at draw " + std::to_string(draw));
        }
    const Tensor c1 = random_tensor({m}, rng, -3, 3), c2 = random_tensor({m}, rng, -3, 3);
    const double al = rng.uniform(-2, 2), be = rng.uniform(-2, 2);
    Tensor cmix({m}), xmix(xv.shape());
    for (std::size_t k = 0; k < m; ++k) cmix[k] = al * c1[k] + be * c2[k];
    for (std::size_t k = 0; k < xv.size(); ++k) xmix[k] = al * xv[k] + be * x2v[k];
    auto sbp = [](const Tensor& xx, const Tensor& cc) {
      const SpatialTensor out = spatial_bilinear_pool(SpatialTensor(xx), ConditionVector(cc));
      return out.values();
    };
    const Tensor lc = sbp(xv, cmix), r1 = sbp(xv, c1), r2 = sbp(xv, c2);
    const Tensor lx = sbp(xmix, c1), s1 = sbp(x2v, c1);
    for (std::size_t k = 0; k < lc.size(); ++k) {
      worst = std::max(worst, std::abs(lc[k] - (al * r1[k] + be * r2[k])));
      worst = std::max(worst, std::abs(lx[k] - (al * r1[k] + be * s1[k])));
    }
  }
  if (worst > kBilinearTol) o.fail("bilinearity error " + fmt("%.3g", worst));
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.below(8), d = 1 + rng.below(5), m = 1 + rng.below(12);
    const SpatialTensor out = spatial_bilinear_pool(SpatialTensor(random_tensor({n, n, d}, rng)), ConditionVector(random_tensor({m}, rng)));
    if (out.values().shape() != Shape{n, n, d * m}) o.fail("shape " + to_string(out.values().shape()));
  }
  if (o.pass) o.detail = "1000 draws exact selection, bilinearity error " + fmt("%.2g", worst) + ", 50 shapes";
  return o;
}

// ---- A3 ----------------------------------------------------------------------

Outcome a3() {
  Outcome o;
  Rng rng(303);
  double worst = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n = 1 + rng.below(50), t = 1 + rng.below(50), d = 1 + rng.below(10);
    const double scale = rng.uniform(0.1, 2.0);
    const Tensor s = random_tensor({n, d}, rng, -scale, scale), q = random_tensor({t, d}, rng, -scale, scale);
    const double sigma = std::exp(rng.uniform(std::log(0.1), std::log(2.0)));
    const auto ll = parzen_log_likelihood(s, q, sigma);
    for (std::size_t i = 0; i < t; ++i)
      worst = std::max(worst, std::abs(ll[i] - static_cast<double>(testing::parzen_direct(s, q, i, sigma))));
  }
  if (worst > kParzenTol) o.fail("max deviation from direct summation " + fmt("%.3g", worst));
  double peak_worst = 0;
  for (std::size_t d = 1; d <= 10; ++d) {
    const Tensor p = random_tensor({1, d}, rng);
    const double ll = parzen_log_likelihood(p, p, 1.0)[0];
    peak_worst = std::max(peak_worst, std::abs(ll + 0.5 * static_cast<double>(d) * std::log(2 * std::numbers::pi)));
  }
  if (peak_worst > kPeakTol) o.fail("peak case error " + fmt("%.3g", peak_worst));
  if (o.pass) o.detail = "max deviation " + fmt("%.2g", worst) + ", peak error " + fmt("%.2g", peak_worst);
  return o;
}

// ---- A4 / A5 -------------------------------------------------------------------

std::string row_values(const ParzenReport& r) {
  std::string s;
  for (const auto& row : r.rows) s += (s.empty() ? "" : " ") + row.label + "=" + (row.mean_ll ? fmt("%.3f", *row.mean_ll) : "n/a");
  return s;
}

Outcome a4() {
  Outcome o;
  const auto start = Clock::now();
  const Model g = load_model(mixture_run("sbp") / "g.ckpt");
  const auto report = mixture_eval(generator_sampler(g), "SBP");
  const auto& base = oracle_baseline();
  for (std::size_t c = 0; c < base.rows.size(); ++c) {
    if (!report.rows[c].mean_ll || !base.rows[c].mean_ll) {
      o.fail("missing row " + std::to_string(c));
      continue;
    }
    const double gap = std::abs(*report.rows[c].mean_ll - *base.rows[c].mean_ll);
    if (gap > kFitNats) o.fail("condition " + report.rows[c].label + " gap " + fmt("%.3f", gap) + " nats");
  }
  const double secs = seconds_since(start);
  if (secs > 600) o.fail("runtime " + fmt("%.0f", secs) + " s over 600 s");
  o.detail = (o.pass ? std::string() : o.detail + "; ") + "SBP " + row_values(report) + " vs oracle " + row_values(base);
  return o;
}

Outcome a5() {
  Outcome o;
  std::string summary;
  for (Variant v : kAllVariants) {
    const auto start = Clock::now();
    const std::string name = to_string(v);
    const bool fresh = !fs::exists(work_dir() / ("mixture-" + name) / "g.ckpt");
    const Model g = load_model(mixture_run(name) / "g.ckpt");
    const auto good = mixture_eval(generator_sampler(g), name);
    const auto shuffled = mixture_eval(shuffled_sampler(generator_sampler(g), g.config.condition_dim), name + " shuffled");
    double least = INFINITY;
    for (std::size_t c = 0; c < good.rows.size(); ++c) {
      const double margin = *good.rows[c].mean_ll - *shuffled.rows[c].mean_ll;
      least = std::min(least, margin);
      if (margin < kShuffleNats) o.fail(name + " condition " + good.rows[c].label + " margin " + fmt("%.3f", margin));
    }
    const double secs = seconds_since(start) + (fresh ? 0.0 : g_train_seconds[name]);
    if (secs > 600) o.fail(name + " runtime " + fmt("%.0f", secs) + " s over 600 s");
    summary += (summary.empty() ? "" : ", ") + name + " min margin " + fmt("%.2f", least);
  }
  o.detail = (o.pass ? std::string() : o.detail + "; ") + summary;
  return o;
}

// ---- A6 ------------------------------------------------------------------------

Outcome a6() {
  Outcome o;
  const auto start = Clock::now();
  const auto qdir = work_dir() / "mnist-q", gdir = work_dir() / "mnist-irgan";
  run_cli({"pretrain-q", "--dataset", "tiny-mnist-3", "--seed", std::to_string(kSeed), "--out", qdir.string()});
  const Model q = load_model(qdir / "q.ckpt");
  const auto preset = load_preset("tiny-mnist-3", CONDGAN_DATA_DIR);
  const double acc = accuracy(q, preset.splits.test);
  if (acc < kQAccuracy) o.fail("Q test accuracy " + fmt("%.4f", acc));
  const std::string q_before = sha256_file(qdir / "q.ckpt");

  run_cli({"train", "--dataset", "tiny-mnist-3", "--variant", "irgan", "--q-checkpoint", (qdir / "q.ckpt").string(), "--steps",
           std::to_string(kIrganSteps), "--seed", std::to_string(kSeed), "--progress-every", "0", "--out", gdir.string()});
  if (sha256_file(qdir / "q.ckpt") != q_before) o.fail("Q checkpoint changed during training");

  const Model g = load_model(gdir / "g.ckpt");
  const std::size_t per = 1000, m = g.config.condition_dim;
  std::size_t agree = 0;
  Rng rng = Rng(kSeed).split("a6");
  for (std::size_t c = 0; c < m; ++c) {
    const std::vector<std::size_t> labels(per, c);
    const Tensor probs = classify(q, generate(g, sample_noise(g, per, rng), one_hot_rows(labels, m)));
    for (std::size_t i = 0; i < per; ++i) {
      const double* row = probs.data().data() + i * m;
      if (static_cast<std::size_t>(std::max_element(row, row + m) - row) == c) ++agree;
    }
  }
  const double agreement = static_cast<double>(agree) / static_cast<double>(per * m);
  if (agreement < kIrganAgreement) o.fail("Q agrees with the requested condition on " + fmt("%.3f", agreement));

  const TrainLog log = TrainLog::from_csv(slurp(gdir / "log.csv"));
  const double lambda = 1.0;
  double first = 0, last = 0;
  for (std::size_t i = 0; i < kWindow; ++i) {
    first += *log.records[i].r_g / lambda;
    last += *log.records[log.records.size() - kWindow + i].r_g / lambda;
  }
  first /= kWindow;
  last /= kWindow;
  if (!(last < first)) o.fail("mean R(G)/lambda did not fall: first " + fmt("%.4f", first) + " last " + fmt("%.4f", last));
  const double secs = seconds_since(start);
  if (secs > 1200) o.fail("runtime " + fmt("%.0f", secs) + " s over 1200 s");
  o.detail = (o.pass ? std::string() : o.detail + "; ") + "Q accuracy " + fmt("%.4f", acc) + ", agreement " + fmt("%.3f", agreement) +
             ", R(G)/lambda " + fmt("%.4f", first) + " -> " + fmt("%.4f", last);
  return o;
}

// ---- A7 ------------------------------------------------------------------------

Outcome a7() {
  Outcome o;
  const auto first = mixture_run("sbp");
  const auto again = work_dir() / "mixture-sbp-repeat";
  run_cli(mixture_train_args("sbp", again));
  for (const char* f : {"g.ckpt", "d.ckpt", "log.csv"})
    if (slurp(first / f) != slurp(again / f)) o.fail(std::string(f) + " differs between identical training runs");
  for (const char* d : {"eval-a", "eval-b"})
    run_cli({"eval", "--dataset", "mixture-3x2", "--g-checkpoint", (first / "g.ckpt").string(), "--seed",
             std::to_string(kSeed), "--out", (work_dir() / d).string()});
  for (const char* f : {"report.csv", "table.txt"})
    if (slurp(work_dir() / "eval-a" / f) != slurp(work_dir() / "eval-b" / f))
      o.fail(std::string(f) + " differs between identical evaluation runs");
  if (o.pass) o.detail = "g.ckpt, d.ckpt, log.csv, report.csv, table.txt byte-identical";
  return o;
}

// ---- A8 ------------------------------------------------------------------------

template <typename Fn>
bool rejected(Fn&& fn) {
  try {
    fn();
  } catch (const ParseError& e) {
    return std::string(e.what()).find("offset") != std::string::npos;
  } catch (const DataError& e) {
    return std::string(e.what()).size() > 0;
  }
  return false;
}

Outcome a8() {
  Outcome o;
  Rng rng(808);
  // IDX header example and wrong magic.
  {
    const auto bytes = encode_idx_images({60000, 28, 28, std::vector<std::uint8_t>(60000u * 784u, 0)});
    const std::vector<std::uint8_t> head(bytes.begin(), bytes.begin() + 8);
    if (head != std::vector<std::uint8_t>{0, 0, 8, 3, 0, 0, 0xEA, 0x60}) o.fail("IDX header bytes");
    const auto im = parse_idx_images(bytes);
    if (im.count != 60000 || im.rows != 28 || im.cols != 28) o.fail("IDX header parse");
    auto labels = encode_idx_labels(std::vector<std::uint8_t>{1});
    labels[3] = 3;
    try {
      parse_idx_labels(labels);
      o.fail("label file with image magic accepted");
    } catch (const ParseError& e) {
      if (std::string(e.what()).find("expected 0x00000801") == std::string::npos) o.fail("wrong-magic message");
    }
    if (scale_pixel(255) != 1.0 || scale_pixel(0) != -1.0) o.fail("pixel scale endpoints");
    for (int b = 0; b < 256; ++b)
      if (unscale_pixel(scale_pixel(static_cast<std::uint8_t>(b))) != b) o.fail("scale not invertible");
  }
  // IDX round trip on the bundled subset.
  {
    const auto dir = fs::path(CONDGAN_DATA_DIR) / "mnist-subset";
    const auto img = read_file_bytes(dir / "train-images-idx3-ubyte");
    const auto lab = read_file_bytes(dir / "train-labels-idx1-ubyte");
    const auto parsed = parse_idx_images(std::vector<std::uint8_t>(img.begin(), img.end()));
    const auto labels = parse_idx_labels(std::vector<std::uint8_t>(lab.begin(), lab.end()));
    if (encode_idx_images(parsed) != std::vector<std::uint8_t>(img.begin(), img.end())) o.fail("IDX image round trip");
    if (encode_idx_labels(labels) != std::vector<std::uint8_t>(lab.begin(), lab.end())) o.fail("IDX label round trip");
  }
  // IDX fuzz.
  int idx_rejected = 0;
  {
    IdxImages im{3, 4, 5, std::vector<std::uint8_t>(60)};
    for (auto& p : im.pixels) p = static_cast<std::uint8_t>(rng.below(256));
    const auto good_img = encode_idx_images(im);
    const auto good_lab = encode_idx_labels(std::vector<std::uint8_t>{0, 1, 2});
    for (int i = 0; i < 100; ++i) {
      const bool images = i % 2 == 0;
      auto b = images ? good_img : good_lab;
      const std::size_t header = images ? 16 : 8;
      const std::size_t k = rng.below(header);
      switch (rng.below(3)) {
        case 0:
          b[k] = static_cast<std::uint8_t>(b[k] ^ (1 + rng.below(255)));
          break;
        case 1:
          b.resize(rng.below(b.size()));
          break;
        default:
          b.resize(b.size() + 1 + rng.below(16), 0);
          break;
      }
      const bool ok = images ? rejected([&] { parse_idx_images(b); }) : rejected([&] { parse_idx_labels(b); });
      if (ok) ++idx_rejected;
    }
    if (idx_rejected != 100) o.fail("IDX fuzz rejected " + std::to_string(idx_rejected) + "/100");
  }
  // CIFAR-10 record, round trip and fuzz.
  int cifar_rejected = 0;
  {
    std::vector<std::uint8_t> bytes(2 * kCifarRecordBytes);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.below(256));
    bytes[0] = 6;
    bytes[kCifarRecordBytes] = 3;
    const auto data = parse_cifar10_binary(bytes, "a8");
    if (data.label_of(0) != 6 || std::string(kCifarLabelNames[6]) != "frog") o.fail("CIFAR label 6");
    for (std::size_t r = 0; r < 2; ++r) {
      const auto rec = encode_cifar10_record(data, r);
      if (!std::equal(rec.begin(), rec.end(), bytes.begin() + static_cast<std::ptrdiff_t>(r * kCifarRecordBytes)))
        o.fail("CIFAR round trip");
    }
    try {
      parse_cifar10_binary(std::vector<std::uint8_t>(bytes.begin(), bytes.end() - 1));
      o.fail("truncated CIFAR accepted");
    } catch (const ParseError& e) {
      if (std::string(e.what()).find("3073") == std::string::npos) o.fail("CIFAR truncation message");
    }
    for (int i = 0; i < 100; ++i) {
      auto b = bytes;
      switch (rng.below(3)) {
        case 0:
          b[rng.below(2) * kCifarRecordBytes] = static_cast<std::uint8_t>(10 + rng.below(246));
          break;
        case 1: {
          std::size_t n = rng.below(b.size());
          if (n % kCifarRecordBytes == 0) ++n;
          b.resize(n);
          break;
        }
        default:
          b.resize(b.size() + 1 + rng.below(kCifarRecordBytes - 1), 0);
          break;
      }
      if (rejected([&] { parse_cifar10_binary(b); })) ++cifar_rejected;
    }
    if (cifar_rejected != 100) o.fail("CIFAR fuzz rejected " + std::to_string(cifar_rejected) + "/100");
  }
  if (o.pass) o.detail = "IDX fuzz " + std::to_string(idx_rejected) + "/100, CIFAR fuzz " + std::to_string(cifar_rejected) + "/100 rejected";
  return o;
}

// ---- A9 ------------------------------------------------------------------------

Outcome a9() {
  Outcome o;
  const auto out = work_dir() / "eval-all";
  std::vector<std::string> args{"eval", "--dataset", "mixture-3x2", "--seed", std::to_string(kSeed), "--out", out.string()};
  for (Variant v : kAllVariants) {
    args.push_back("--g-checkpoint");
    args.push_back((mixture_run(to_string(v)) / "g.ckpt").string());
  }
  run_cli(args);
  const std::string table = slurp(out / "table.txt");
  const std::string masked = std::regex_replace(table, std::regex("\\| +-?[0-9]+\\.[0-9]"), "| #");
  const std::string golden = slurp(fs::path(CONDGAN_GOLDEN_DIR) / "acceptance_table_mixture_3x2.txt");
  if (masked != golden) o.fail("table.txt does not match the golden layout:\n" + table);
  for (std::size_t i = 0; i < 4; ++i) {
    const std::string csv = slurp(out / ("report_" + std::to_string(i) + ".csv"));
    if (std::count(csv.begin(), csv.end(), '\n') != 4) o.fail("report_" + std::to_string(i) + ".csv row count");
  }
  if (o.pass) o.detail = "4 models x 3 labels, golden layout matched";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, Outcome (*)()>> criteria{
      {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5}, {"A6", a6}, {"A7", a7}, {"A8", a8}, {"A9", a9}};
  const std::map<std::string, double> budgets{{"A1", 60}, {"A2", 10}, {"A3", 10}, {"A8", 10}};
  std::set<std::string> wanted(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    if (!wanted.empty() && !wanted.count(name)) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    const double secs = seconds_since(start);
    if (auto it = budgets.find(name); it != budgets.end() && secs > it->second)
      o.fail("runtime " + fmt("%.1f", secs) + " s over " + fmt("%.0f", it->second) + " s");
    if (!o.pass) ++failures;
    std::cout << name << " " << (o.pass ? "PASS" : "FAIL") << " (" << fmt("%.1f", secs) << " s) " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
