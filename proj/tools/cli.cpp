#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "condgan/checkpoint.hpp"
#include "condgan/data.hpp"
#include "condgan/errors.hpp"
#include "condgan/models.hpp"
#include "condgan/parzen.hpp"
#include "condgan/training.hpp"

namespace condgan::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string default_data_dir() {
  if (const char* env = std::getenv("CONDGAN_DATA_DIR"); env && *env) return env;
  return CONDGAN_DEFAULT_DATA_DIR;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string upper(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

// Options shared by every command.
struct Common {
  std::string dataset;
  std::string data_dir = default_data_dir();
  std::uint64_t seed = 0;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool needs_dataset) {
  auto* ds = cmd->add_option("--dataset", c.dataset, "Dataset preset: tiny-mnist-3, mixture-3x2, mnist, cifar10");
  if (needs_dataset) ds->required();
  cmd->add_option("--data-dir", c.data_dir, "Directory holding dataset files")->capture_default_str();
  cmd->add_option("--seed", c.seed, "Run seed")->capture_default_str();
  cmd->add_option("--out", c.out, "Output directory")->required();
  cmd->fallthrough();
}

// Value written to config.ini: CLI11 reads `name=value` with arrays as [a,b].
std::string ini_value(const json& v) {
  if (v.is_string()) return "\"" + v.get<std::string>() + "\"";
  if (v.is_array()) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + ini_value(v[i]);
    return s + "]";
  }
  if (v.is_number_float()) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  return v.dump();
}

std::string to_ini(const std::string& command, const json& resolved) {
  std::string out = "[" + command + "]\n";
  for (auto it = resolved.begin(); it != resolved.end(); ++it) {
    if (it.key() == "out") continue;
    out += it.key() + "=" + ini_value(it.value()) + "\n";
  }
  return out;
}

struct Artifacts {
  json entries = json::object();
  void add(const std::string& name, const fs::path& path) {
    entries[name] = {{"path", path.string()}, {"sha256", sha256_file(path)}};
  }
};

void write_manifest(const fs::path& dir, const std::string& command, const json& resolved, const json& dataset,
                    const Artifacts& artifacts, double wall_ms, const std::string& started) {
  write_text_file(dir / "config.ini", to_ini(command, resolved));
  json manifest = {
      {"tool", "condgan"},
      {"version", CONDGAN_VERSION},
      {"command", command},
      {"config", resolved},
      {"dataset", dataset},
      {"seed", resolved.value("seed", 0)},
      {"artifacts", artifacts.entries},
      {"config_file", (dir / "config.ini").string()},
      {"timings", {{"started_utc", started}, {"wall_ms", wall_ms}}},
  };
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

json dataset_json(const std::string& name, const PresetData& data) {
  return {{"name", name},
          {"checksum", data.checksum},
          {"scale", data.splits.train.meta.scale_convention},
          {"train", data.splits.train.count()},
          {"valid", data.splits.valid.count()},
          {"test", data.splits.test.count()}};
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

// ---- pretrain-q --------------------------------------------------------------

struct PretrainFlags {
  Common common;
  std::vector<std::size_t> hidden{64};
  std::size_t steps = 1500;
  std::size_t batch_size = 64;
  std::size_t eval_every = 50;
  double lr = 1e-3;
};

int cmd_pretrain_q(const PretrainFlags& f, std::ostream& out, std::ostream& err) {
  const auto started_at = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  const json resolved = {{"dataset", f.common.dataset}, {"data-dir", f.common.data_dir}, {"seed", f.common.seed},
                         {"out", f.common.out},         {"hidden", f.hidden},           {"steps", f.steps},
                         {"batch-size", f.batch_size},  {"eval-every", f.eval_every},   {"lr", f.lr}};
  const PresetData data = load_preset(f.common.dataset, f.common.data_dir);
  PretrainOptions options;
  options.steps = f.steps;
  options.batch_size = f.batch_size;
  options.eval_every = f.eval_every;
  options.adam.lr = f.lr;
  options.seed = f.common.seed;
  err << "pretraining approximator on " << f.common.dataset << " for " << f.steps << " steps\n";
  const PretrainResult result =
      pretrain_approximator(data.splits.train, data.splits.valid, default_approximator_net(f.hidden), options);

  const fs::path dir = f.common.out;
  fs::create_directories(dir);
  save_model(dir / "q.ckpt", result.model, {{"valid_accuracy", result.valid_accuracy}, {"best_step", result.best_step}});
  const json summary = {{"command", "pretrain-q"},
                        {"dataset", f.common.dataset},
                        {"valid_accuracy", result.valid_accuracy},
                        {"best_step", result.best_step},
                        {"steps", f.steps},
                        {"checkpoint", (dir / "q.ckpt").string()}};
  write_text_file(dir / "pretrain.json", summary.dump(2) + "\n");
  Artifacts artifacts;
  artifacts.add("q_checkpoint", dir / "q.ckpt");
  artifacts.add("summary", dir / "pretrain.json");
  write_manifest(dir, "pretrain-q", resolved, dataset_json(f.common.dataset, data), artifacts, elapsed_ms(started_at),
                 started);
  out << summary.dump() << "\n";
  return kExitOk;
}

// ---- train -------------------------------------------------------------------

struct TrainFlags {
  Common common;
  std::string variant;
  std::size_t steps = 1000;
  double lambda = NAN;  // resolved to 1 for irgan, 0 otherwise
  std::string q_checkpoint;
  std::size_t batch_size = 64;
  double lr_g = 2e-4;
  double lr_d = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  std::size_t d_steps = 1;
  std::string g_loss = "non_saturating";
  std::size_t noise_dim = 64;
  std::vector<std::size_t> g_hidden{128, 128};
  std::vector<std::size_t> d_hidden{128, 128};
  std::vector<std::size_t> sbp_depths{0};
  std::size_t checkpoint_every = 0;
  std::size_t progress_every = 100;
  bool resume = false;
  bool record_wall_time = false;
};

TrainConfig to_train_config(const TrainFlags& f, Variant variant, double lambda) {
  TrainConfig c;
  c.variant = variant;
  c.batch_size = f.batch_size;
  c.total_steps = f.steps;
  c.d_steps_per_g_step = f.d_steps;
  c.lambda = lambda;
  c.g_adam = {f.lr_g, f.beta1, f.beta2, 1e-8};
  c.d_adam = {f.lr_d, f.beta1, f.beta2, 1e-8};
  c.seed = f.common.seed;
  c.generator_loss = parse_generator_loss_mode(f.g_loss);
  c.noise_dim = f.noise_dim;
  c.g_hidden = f.g_hidden;
  c.d_hidden = f.d_hidden;
  c.sbp_depths = f.sbp_depths;
  c.record_wall_time = f.record_wall_time;
  c.validate();
  return c;
}

int cmd_train(const TrainFlags& f, std::ostream& out, std::ostream& err) {
  const auto started_at = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  const Variant variant = parse_variant(f.variant);
  const bool irgan = variant == Variant::irgan;
  if (irgan && f.q_checkpoint.empty()) {
    throw ConfigError("--variant irgan needs --q-checkpoint (a pretrained approximator; see pretrain-q)");
  }
  if (!irgan && !f.q_checkpoint.empty()) throw ConfigError("--q-checkpoint is only used by --variant irgan");
  const double lambda = std::isnan(f.lambda) ? (irgan ? 1.0 : 0.0) : f.lambda;
  const TrainConfig config = to_train_config(f, variant, lambda);

  json resolved = {{"dataset", f.common.dataset},
                   {"data-dir", f.common.data_dir},
                   {"seed", f.common.seed},
                   {"out", f.common.out},
                   {"variant", to_string(variant)},
                   {"steps", f.steps},
                   {"lambda", lambda},
                   {"batch-size", f.batch_size},
                   {"lr-g", f.lr_g},
                   {"lr-d", f.lr_d},
                   {"beta1", f.beta1},
                   {"beta2", f.beta2},
                   {"d-steps", f.d_steps},
                   {"g-loss", to_string(config.generator_loss)},
                   {"noise-dim", f.noise_dim},
                   {"g-hidden", f.g_hidden},
                   {"d-hidden", f.d_hidden},
                   {"sbp-depths", f.sbp_depths},
                   {"checkpoint-every", f.checkpoint_every},
                   {"progress-every", f.progress_every},
                   {"record-wall-time", f.record_wall_time}};
  if (irgan) resolved["q-checkpoint"] = f.q_checkpoint;

  const PresetData data = load_preset(f.common.dataset, f.common.data_dir);
  std::optional<Model> q;
  std::string q_hash;
  if (irgan) {
    q = load_model(f.q_checkpoint);
    q_hash = q->fingerprint();
  }

  const fs::path dir = f.common.out;
  fs::create_directories(dir);
  std::unique_ptr<Trainer> trainer;
  TrainLog log;
  if (f.resume && fs::exists(dir / "g.ckpt")) {
    Model g = load_model(dir / "g.ckpt");
    Model d = load_model(dir / "d.ckpt");
    const Container g_raw = read_container(dir / "g.ckpt");
    const auto done = g_raw.header.at("extra").at("steps_done").get<std::uint64_t>();
    std::ifstream in(dir / "log.csv");
    std::stringstream text;
    text << in.rdbuf();
    log = TrainLog::from_csv(text.str());
    if (log.records.size() != done) throw DataError("log.csv does not match the checkpoint step count");
    err << "resuming " << to_string(variant) << " from step " << done << "\n";
    trainer = std::make_unique<Trainer>(config, data.splits.train, q, std::move(g), std::move(d), done);
  } else {
    trainer = std::make_unique<Trainer>(config, data.splits.train, q);
  }

  const json extra_base = {{"dataset", f.common.dataset}, {"variant", to_string(variant)}};
  auto save_pair = [&](const fs::path& where, const Trainer& t, const TrainLog& l) {
    json extra = extra_base;
    extra["steps_done"] = t.steps_done();
    save_model(where / "g.ckpt", t.generator(), extra);
    save_model(where / "d.ckpt", t.discriminator(), extra);
    write_text_file(where / "log.csv", l.to_csv());
  };
  const CheckpointFn on_checkpoint = [&](const Trainer& t, const TrainLog& l) {
    if (t.steps_done() < t.config().total_steps) {
      save_pair(dir / "checkpoints" / ("step_" + std::to_string(t.steps_done())), t, l);
    }
    save_pair(dir, t, l);
  };
  const ProgressFn on_progress = [&](const TrainRecord& r) {
    if (f.progress_every && (r.step % f.progress_every == 0 || r.step == config.total_steps)) {
      err << "step " << r.step << " d_loss " << r.d_loss << " g_loss " << r.g_loss;
      if (r.r_g) err << " r_g " << *r.r_g;
      err << "\n";
    }
  };
  const TrainResult result = run_training(*trainer, std::move(log), f.checkpoint_every, on_checkpoint, on_progress);

  if (q && q->fingerprint() != q_hash) throw ContractError("approximator parameters changed during training");

  Artifacts artifacts;
  artifacts.add("g_checkpoint", dir / "g.ckpt");
  artifacts.add("d_checkpoint", dir / "d.ckpt");
  artifacts.add("log", dir / "log.csv");
  write_manifest(dir, "train", resolved, dataset_json(f.common.dataset, data), artifacts, elapsed_ms(started_at), started);

  json summary = {{"command", "train"},
                  {"variant", to_string(variant)},
                  {"dataset", f.common.dataset},
                  {"steps", trainer->steps_done()},
                  {"g_checkpoint", (dir / "g.ckpt").string()},
                  {"d_checkpoint", (dir / "d.ckpt").string()},
                  {"log", (dir / "log.csv").string()}};
  if (!result.log.records.empty()) {
    summary["final_d_loss"] = result.log.records.back().d_loss;
    summary["final_g_loss"] = result.log.records.back().g_loss;
  }
  out << summary.dump() << "\n";
  return kExitOk;
}

// ---- eval --------------------------------------------------------------------

struct EvalFlags {
  Common common;
  std::vector<std::string> g_checkpoints;
  std::vector<std::string> model_names;
  std::string sigma_grid = "default";
  std::size_t samples_per_condition = 2000;
  std::string sigma_mode = "per_condition";
  std::size_t query_chunk = 256;
  bool shuffle_conditions = false;
};

std::vector<double> parse_grid(const std::string& text) {
  if (text == "default") return default_sigma_grid();
  std::vector<double> grid;
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    try {
      std::size_t used = 0;
      grid.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ConfigError("bad --sigma-grid entry '" + cell + "'");
    }
  }
  return grid;
}

int cmd_eval(const EvalFlags& f, std::ostream& out, std::ostream& err) {
  const auto started_at = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  if (!f.model_names.empty() && f.model_names.size() != f.g_checkpoints.size()) {
    throw ConfigError("--model-name must be given once per --g-checkpoint");
  }
  ParzenConfig cfg;
  cfg.sigma_grid = parse_grid(f.sigma_grid);
  cfg.samples_per_condition = f.samples_per_condition;
  cfg.sigma_mode = parse_sigma_mode(f.sigma_mode);
  cfg.query_chunk = f.query_chunk;
  cfg.validate();
  const json resolved = {{"dataset", f.common.dataset},
                         {"data-dir", f.common.data_dir},
                         {"seed", f.common.seed},
                         {"out", f.common.out},
                         {"g-checkpoint", f.g_checkpoints},
                         {"model-name", f.model_names},
                         {"sigma-grid", f.sigma_grid},
                         {"samples-per-condition", f.samples_per_condition},
                         {"sigma-mode", to_string(cfg.sigma_mode)},
                         {"query-chunk", f.query_chunk},
                         {"shuffle-conditions", f.shuffle_conditions}};

  const PresetData data = load_preset(f.common.dataset, f.common.data_dir);
  const LabeledDataset& test = data.splits.test;
  std::vector<Model> generators;
  for (const auto& path : f.g_checkpoints) {
    Model g = load_model(path);
    if (g.config.role != Role::generator) throw ConfigError(path + " is not a generator checkpoint");
    if (g.config.condition_dim != test.condition_dim() || g.config.image != test.image_shape()) {
      throw DimensionError(path + ": generator expects " + std::to_string(g.config.condition_dim) + " conditions and " +
                           to_string(g.config.image.shape()) + " images; dataset " + f.common.dataset + " has " +
                           std::to_string(test.condition_dim()) + " and " + to_string(test.image_shape().shape()));
    }
    generators.push_back(std::move(g));
  }

  const fs::path dir = f.common.out;
  fs::create_directories(dir);
  std::vector<ParzenReport> reports;
  Artifacts artifacts;
  json rows = json::array();
  for (std::size_t i = 0; i < generators.size(); ++i) {
    std::string name = f.model_names.empty() ? upper(to_string(generators[i].config.variant)) : f.model_names[i];
    ConditionalSampler sampler = generator_sampler(generators[i]);
    if (f.shuffle_conditions) {
      sampler = shuffled_sampler(sampler, test.condition_dim());
      if (f.model_names.empty()) name += " (shuffled)";
    }
    err << "evaluating " << name << " on " << f.common.dataset << "\n";
    ParzenReport report = conditional_eval(sampler, data.splits.valid, test, cfg, f.common.seed, name);
    const fs::path csv = dir / (generators.size() == 1 ? std::string("report.csv") : "report_" + std::to_string(i) + ".csv");
    write_text_file(csv, report.to_csv());
    artifacts.add(csv.stem().string(), csv);
    for (const auto& r : report.rows) {
      json row = {{"model", name}, {"condition", r.label}, {"n_test", r.n_test}, {"n_samples", r.n_samples}};
      if (r.mean_ll) {
        row["sigma"] = *r.sigma;
        row["mean_ll"] = *r.mean_ll;
        row["stderr"] = *r.stderr_ll;
      } else {
        row["diagnostic"] = r.diagnostic;
        err << "warning: " << name << " condition " << r.label << ": " << r.diagnostic << "\n";
      }
      rows.push_back(row);
    }
    reports.push_back(std::move(report));
  }
  const std::string title = "Parzen window-based log-likelihood estimates on " + f.common.dataset;
  write_text_file(dir / "table.txt", format_table(reports, test.meta.label_names, title) + "\nPixel scale: " +
                                         test.meta.scale_convention + "\n");
  artifacts.add("table", dir / "table.txt");
  write_manifest(dir, "eval", resolved, dataset_json(f.common.dataset, data), artifacts, elapsed_ms(started_at), started);
  out << json{{"command", "eval"}, {"dataset", f.common.dataset}, {"rows", rows}, {"table", (dir / "table.txt").string()}}.dump()
      << "\n";
  return kExitOk;
}

// ---- sample ------------------------------------------------------------------

struct SampleFlags {
  Common common;
  std::string g_checkpoint;
  std::size_t condition = 0;
  std::size_t count = 16;
};

// Grid of samples as binary PGM (d != 3) or PPM (d == 3).  Channels other
// than 1 and 3 are laid side by side within each tile.
std::vector<unsigned char> image_grid(const Tensor& samples, const ImageShape& image) {
  const std::size_t count = samples.dim(0);
  const bool rgb = image.channels == 3;
  const std::size_t tile_w = rgb ? image.width : image.width * image.channels;
  const std::size_t tile_h = image.height;
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(count))));
  const std::size_t rows = (count + cols - 1) / cols;
  const std::size_t width = cols * tile_w, height = rows * tile_h, depth = rgb ? 3 : 1;
  std::vector<unsigned char> pixels(width * height * depth, 0);
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t ox = (s % cols) * tile_w, oy = (s / cols) * tile_h;
    for (std::size_t y = 0; y < image.height; ++y)
      for (std::size_t x = 0; x < image.width; ++x)
        for (std::size_t k = 0; k < image.channels; ++k) {
          const double v = samples[((s * image.height + y) * image.width + x) * image.channels + k];
          const std::size_t px = rgb ? ox + x : ox + k * image.width + x;
          pixels[((oy + y) * width + px) * depth + (rgb ? k : 0)] = unscale_pixel(std::clamp(v, -1.0, 1.0));
        }
  }
  const std::string header = std::string(rgb ? "P6" : "P5") + "\n" + std::to_string(width) + " " +
                             std::to_string(height) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

int cmd_sample(const SampleFlags& f, std::ostream& out, std::ostream& err) {
  const auto started_at = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  const json resolved = {{"g-checkpoint", f.g_checkpoint}, {"condition", f.condition}, {"count", f.count},
                         {"seed", f.common.seed},          {"out", f.common.out}};
  if (f.count == 0) throw ConfigError("--count must be positive");
  const Model g = load_model(f.g_checkpoint);
  if (g.config.role != Role::generator) throw ConfigError(f.g_checkpoint + " is not a generator checkpoint");
  const std::size_t m = g.config.condition_dim;
  if (f.condition >= m) {
    throw ConfigError("--condition " + std::to_string(f.condition) + " out of range; the generator has " +
                      std::to_string(m) + " conditions (0.." + std::to_string(m - 1) + ")");
  }
  Rng rng = Rng(f.common.seed).split("sample");
  const std::vector<std::size_t> labels(f.count, f.condition);
  const Tensor samples = generate(g, sample_noise(g, f.count, rng), one_hot_rows(labels, m));

  const fs::path dir = f.common.out;
  fs::create_directories(dir);
  Container c;
  const std::string label = f.condition < g.config.label_names.size() ? g.config.label_names[f.condition]
                                                                       : std::to_string(f.condition);
  c.header = {{"format", "condgan-samples"},
              {"condition", f.condition},
              {"label", label},
              {"count", f.count},
              {"seed", f.common.seed},
              {"generator_sha256", sha256_file(f.g_checkpoint)}};
  c.tensors.emplace_back("samples", samples);
  write_container(dir / "samples.bin", c);
  const fs::path grid = dir / (g.config.image.channels == 3 ? "samples.ppm" : "samples.pgm");
  write_file_bytes(grid, image_grid(samples, g.config.image));
  Artifacts artifacts;
  artifacts.add("samples", dir / "samples.bin");
  artifacts.add("grid", grid);
  write_manifest(dir, "sample", resolved, json{{"name", g.config.dataset}}, artifacts, elapsed_ms(started_at), started);
  err << "wrote " << f.count << " samples of condition " << label << "\n";
  out << json{{"command", "sample"}, {"count", f.count}, {"condition", f.condition}, {"samples", (dir / "samples.bin").string()},
              {"grid", grid.string()}}.dump()
      << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conditioned GAN laboratory: pretrain approximators, train, evaluate, sample"};
  app.require_subcommand(1);
  app.set_version_flag("--version", CONDGAN_VERSION);
  app.set_config("--config", "", "Config file: a [command] section of key=value lines; flags override it");

  PretrainFlags pf;
  auto* pre = app.add_subcommand("pretrain-q", "Pretrain the condition approximator Q(c|x)");
  add_common(pre, pf.common, true);
  pre->add_option("--hidden", pf.hidden, "Hidden layer widths")->capture_default_str();
  pre->add_option("--steps", pf.steps, "Optimizer steps")->capture_default_str();
  pre->add_option("--batch-size", pf.batch_size)->capture_default_str();
  pre->add_option("--eval-every", pf.eval_every, "Validation interval in steps")->capture_default_str();
  pre->add_option("--lr", pf.lr)->capture_default_str();

  TrainFlags tf;
  auto* tr = app.add_subcommand("train", "Train a conditioned GAN");
  add_common(tr, tf.common, true);
  tr->add_option("--variant", tf.variant, "cgan, fcgan, sbp or irgan")->required();
  tr->add_option("--steps", tf.steps, "Total generator steps")->capture_default_str();
  tr->add_option("--lambda", tf.lambda, "IRGAN regularizer weight (default 1 for irgan)");
  tr->add_option("--q-checkpoint", tf.q_checkpoint, "Pretrained approximator (irgan only)");
  tr->add_option("--batch-size", tf.batch_size)->capture_default_str();
  tr->add_option("--lr-g", tf.lr_g)->capture_default_str();
  tr->add_option("--lr-d", tf.lr_d)->capture_default_str();
  tr->add_option("--beta1", tf.beta1)->capture_default_str();
  tr->add_option("--beta2", tf.beta2)->capture_default_str();
  tr->add_option("--d-steps", tf.d_steps, "Discriminator updates per generator update")->capture_default_str();
  tr->add_option("--g-loss", tf.g_loss, "minimax or non_saturating")->capture_default_str();
  tr->add_option("--noise-dim", tf.noise_dim)->capture_default_str();
  tr->add_option("--g-hidden", tf.g_hidden)->capture_default_str();
  tr->add_option("--d-hidden", tf.d_hidden)->capture_default_str();
  tr->add_option("--sbp-depths", tf.sbp_depths, "SBP injection points (0 = input)")->capture_default_str();
  tr->add_option("--checkpoint-every", tf.checkpoint_every, "Intermediate checkpoint interval (0 = none)")
      ->capture_default_str();
  tr->add_option("--progress-every", tf.progress_every)->capture_default_str();
  tr->add_flag("--resume", tf.resume, "Continue from the checkpoints in --out");
  tr->add_flag("--record-wall-time", tf.record_wall_time, "Fill wall_ms in log.csv");

  EvalFlags ef;
  auto* ev = app.add_subcommand("eval", "Parzen-window log-likelihood per condition");
  add_common(ev, ef.common, true);
  ev->add_option("--g-checkpoint", ef.g_checkpoints, "Generator checkpoint (repeatable)")->required();
  ev->add_option("--model-name", ef.model_names, "Row name per checkpoint");
  ev->add_option("--sigma-grid", ef.sigma_grid, "Comma-separated bandwidths or 'default'")->capture_default_str();
  ev->add_option("--samples-per-condition", ef.samples_per_condition)->capture_default_str();
  ev->add_option("--sigma-mode", ef.sigma_mode, "per_condition or global")->capture_default_str();
  ev->add_option("--query-chunk", ef.query_chunk)->capture_default_str();
  ev->add_flag("--shuffle-conditions", ef.shuffle_conditions, "Control: sample condition c from c+1");

  SampleFlags sf;
  auto* sa = app.add_subcommand("sample", "Draw samples for one condition");
  add_common(sa, sf.common, false);
  sa->add_option("--g-checkpoint", sf.g_checkpoint)->required();
  sa->add_option("--condition", sf.condition, "Condition index")->required();
  sa->add_option("--count", sf.count)->capture_default_str();

  std::vector<std::string> argv_store{"condgan"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << CONDGAN_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (pre->parsed()) return cmd_pretrain_q(pf, out, err);
    if (tr->parsed()) return cmd_train(tf, out, err);
    if (ev->parsed()) return cmd_eval(ef, out, err);
    if (sa->parsed()) return cmd_sample(sf, out, err);
    err << "error: no command\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DimensionError& e) {
    err << "dimension error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace condgan::cli
