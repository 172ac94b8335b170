#include "condgan/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "condgan/errors.hpp"

namespace condgan {

std::string to_string(GeneratorLossMode mode) {
  return mode == GeneratorLossMode::minimax ? "minimax" : "non_saturating";
}

GeneratorLossMode parse_generator_loss_mode(std::string_view text) {
  if (text == "minimax") return GeneratorLossMode::minimax;
  if (text == "non_saturating") return GeneratorLossMode::non_saturating;
  throw ConfigError("unknown generator loss mode '" + std::string(text) + "' (expected minimax or non_saturating)");
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (d_steps_per_g_step == 0) throw ConfigError("d_steps_per_g_step must be positive");
  if (noise_dim == 0) throw ConfigError("noise_dim must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be a non-negative real");
  if (variant == Variant::irgan && !(lambda > 0.0)) throw ConfigError("irgan requires lambda > 0");
  if (variant != Variant::irgan && lambda != 0.0) {
    throw ConfigError("lambda applies only to irgan; got " + std::to_string(lambda) + " for " + to_string(variant));
  }
  g_adam.validate();
  d_adam.validate();
}

namespace {

void require_open_unit(const Tensor& p, const char* what) {
  for (double v : p.data()) {
    if (!(v > 0.0 && v < 1.0)) throw ContractError(std::string(what) + " probability " + std::to_string(v) + " outside (0, 1)");
  }
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Var d_loss(const Var& d_real, const Var& d_fake) {
  require_open_unit(d_real.value(), "d_real");
  require_open_unit(d_fake.value(), "d_fake");
  const Var real_term = mean(log_clamped(d_real, kLogFloor));
  const Var fake_term = mean(log_clamped(add_scalar(scale(d_fake, -1.0), 1.0), kLogFloor));
  return scale(add(real_term, fake_term), -1.0);
}

Var g_loss(const Var& d_fake, GeneratorLossMode mode) {
  require_open_unit(d_fake.value(), "d_fake");
  if (mode == GeneratorLossMode::minimax) return mean(log_clamped(add_scalar(scale(d_fake, -1.0), 1.0), kLogFloor));
  return scale(mean(log_clamped(d_fake, kLogFloor)), -1.0);
}

Var irgan_regularizer(const Var& q_out, const Tensor& c, double lambda) {
  const Tensor& q = q_out.value();
  if (q.rank() != 2 || q.shape() != c.shape()) {
    throw DimensionError("irgan_regularizer: q_out " + to_string(q.shape()) + " vs conditions " + to_string(c.shape()));
  }
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  const std::size_t m = q.dim(1);
  for (std::size_t r = 0; r < q.dim(0); ++r) {
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double v = q[r * m + j];
      if (!(v >= 0.0 && v <= 1.0)) throw ContractError("q_out row " + std::to_string(r) + " is not a distribution");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ContractError("q_out row " + std::to_string(r) + " does not sum to 1");
  }
  one_hot_indices(c);
  const Var picked = row_sum(mul(q_out, Var::constant(c)));
  return scale(mean(log_clamped(picked, kLogFloor)), -lambda);
}

std::string TrainLog::to_csv() const {
  std::string out = "step,d_loss,g_loss,r_g,wall_ms\n";
  for (const auto& r : records) {
    char wall[40];
    std::snprintf(wall, sizeof wall, "%.3f", r.wall_ms);
    out += std::to_string(r.step) + "," + fmt_double(r.d_loss) + "," + fmt_double(r.g_loss) + "," +
           (r.r_g ? fmt_double(*r.r_g) : std::string()) + "," + wall + "\n";
  }
  return out;
}

TrainLog TrainLog::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "step,d_loss,g_loss,r_g,wall_ms") throw DataError("bad training log header");
  TrainLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream row(line);
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    if (cells.size() != 5) throw DataError("bad training log row: " + line);
    try {
      TrainRecord r;
      r.step = std::stoull(cells[0]);
      r.d_loss = std::stod(cells[1]);
      r.g_loss = std::stod(cells[2]);
      if (!cells[3].empty()) r.r_g = std::stod(cells[3]);
      r.wall_ms = std::stod(cells[4]);
      log.records.push_back(r);
    } catch (const std::exception&) {
      throw DataError("bad training log row: " + line);
    }
  }
  return log;
}

Trainer::Trainer(TrainConfig config, LabeledDataset train, std::optional<Model> q)
    : config_(std::move(config)), train_(std::move(train)), q_(std::move(q)) {
  config_.validate();
  g_ = init_model(generator_config(train_, default_generator_net(config_.g_hidden), config_.noise_dim, config_.seed),
                  config_.g_adam);
  g_.config.variant = config_.variant;
  ModelConfig dc = discriminator_config(train_, config_.variant, default_discriminator_net(config_.d_hidden), config_.seed);
  dc.sbp_depths = config_.sbp_depths;
  d_ = init_model(dc, config_.d_adam);
  check_models();
}

Trainer::Trainer(TrainConfig config, LabeledDataset train, std::optional<Model> q, Model g, Model d,
                 std::uint64_t steps_done)
    : config_(std::move(config)),
      train_(std::move(train)),
      q_(std::move(q)),
      g_(std::move(g)),
      d_(std::move(d)),
      steps_done_(steps_done) {
  config_.validate();
  check_models();
}

void Trainer::check_models() const {
  if ((config_.variant == Variant::irgan) != q_.has_value()) {
    throw ConfigError(config_.variant == Variant::irgan ? "irgan training requires a pretrained approximator"
                                                        : "an approximator is only used by irgan");
  }
  if (g_.config.role != Role::generator || d_.config.role != Role::discriminator) {
    throw ConfigError("trainer needs a generator and a discriminator");
  }
  if (d_.config.variant != config_.variant) throw ConfigError("discriminator variant does not match the configuration");
  for (const Model* m : {&g_, &d_}) {
    if (m->config.image != train_.image_shape() || m->config.condition_dim != train_.condition_dim()) {
      throw DimensionError("model shapes do not match the training set");
    }
  }
  if (q_ && (q_->config.role != Role::approximator || q_->config.image != train_.image_shape() ||
             q_->config.condition_dim != train_.condition_dim())) {
    throw DimensionError("approximator does not match the training set");
  }
}

const std::vector<std::size_t>& Trainer::epoch_order(std::uint64_t epoch) {
  if (epoch != cached_epoch_) {
    order_.resize(train_.count());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    Rng rng = Rng(config_.seed).split("epoch").split(epoch);
    rng.shuffle(std::span(order_));
    cached_epoch_ = epoch;
  }
  return order_;
}

Trainer::Batch Trainer::real_batch(std::uint64_t batch_number) {
  const std::size_t b = config_.batch_size;
  const std::size_t n = train_.count();
  const std::size_t stride = train_.image_shape().flat();
  const std::size_t m = train_.condition_dim();
  Shape ishape = train_.images.shape();
  ishape[0] = b;
  Batch batch{Tensor(ishape), Tensor({b, m})};
  for (std::size_t i = 0; i < b; ++i) {
    const std::uint64_t position = batch_number * b + i;
    const std::size_t row = epoch_order(position / n)[position % n];
    std::copy_n(train_.images.data().data() + row * stride, stride, batch.images.data().data() + i * stride);
    std::copy_n(train_.labels.data().data() + row * m, m, batch.labels.data().data() + i * m);
  }
  return batch;
}

Tensor Trainer::fake_conditions(std::size_t count, Rng& rng) const {
  // Labels of uniformly drawn training rows: the empirical label distribution.
  const std::size_t m = train_.condition_dim();
  Tensor c({count, m});
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t row = rng.below(train_.count());
    std::copy_n(train_.labels.data().data() + row * m, m, c.data().data() + i * m);
  }
  return c;
}

TrainRecord Trainer::step() {
  const std::uint64_t s = steps_done_ + 1;
  const auto started = std::chrono::steady_clock::now();
  TrainRecord record;
  record.step = s;
  try {
    const Rng step_rng = Rng(config_.seed).split("step").split(s);
    const std::size_t b = config_.batch_size;
    for (std::size_t k = 0; k < config_.d_steps_per_g_step; ++k) {
      Rng rng = step_rng.split("d").split(k);
      const Batch real = real_batch(steps_done_ * config_.d_steps_per_g_step + k);
      const Tensor c_fake = fake_conditions(b, rng);
      const Tensor fake = generate(g_, sample_noise(g_, b, rng), c_fake);
      BoundParams bound(d_, true);
      const Var d_real = discriminator_forward(d_, bound, Var::constant(real.images), Var::constant(real.labels));
      const Var d_fake = discriminator_forward(d_, bound, Var::constant(fake), Var::constant(c_fake));
      const Var loss = d_loss(d_real, d_fake);
      backward(loss);
      apply_gradients(d_, bound);
      record.d_loss = loss.value().item();
    }

    Rng rng = step_rng.split("g");
    const Tensor c = fake_conditions(b, rng);
    const Var c_var = Var::constant(c);
    BoundParams g_bound(g_, true);
    const Var x = generator_forward(g_, g_bound, Var::constant(sample_noise(g_, b, rng)), c_var);
    const Var adversarial = g_loss(discriminator_forward(d_, BoundParams(d_, false), x, c_var), config_.generator_loss);
    Var total = adversarial;
    if (config_.variant == Variant::irgan) {
      const Var q_out = approximator_forward(*q_, BoundParams(*q_, false), x);
      const Var r = irgan_regularizer(q_out, c, config_.lambda);
      record.r_g = r.value().item();
      total = add(adversarial, r);
    }
    backward(total);
    apply_gradients(g_, g_bound);
    record.g_loss = adversarial.value().item();
  } catch (const NumericError& e) {
    throw NumericError("training step " + std::to_string(s) + ": " + e.what());
  }
  if (config_.record_wall_time) {
    record.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  }
  steps_done_ = s;
  return record;
}

TrainResult run_training(Trainer& trainer, TrainLog log, std::size_t checkpoint_every, const CheckpointFn& on_checkpoint,
                         const ProgressFn& on_progress) {
  while (trainer.steps_done() < trainer.config().total_steps) {
    log.records.push_back(trainer.step());
    if (on_progress) on_progress(log.records.back());
    if (on_checkpoint && checkpoint_every > 0 && trainer.steps_done() % checkpoint_every == 0 &&
        trainer.steps_done() < trainer.config().total_steps) {
      on_checkpoint(trainer, log);
    }
  }
  if (on_checkpoint) on_checkpoint(trainer, log);
  return {trainer.generator(), trainer.discriminator(), std::move(log)};
}

TrainResult train(const TrainConfig& config, const LabeledDataset& train_set, std::optional<Model> q) {
  if (train_set.count() == 0) throw InputError("empty training set");
  Trainer trainer(config, train_set, std::move(q));
  return run_training(trainer);
}

}  // namespace condgan
