#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "condgan/models.hpp"

namespace condgan {

enum class GeneratorLossMode { minimax, non_saturating };

std::string to_string(GeneratorLossMode mode);
GeneratorLossMode parse_generator_loss_mode(std::string_view text);

inline constexpr double kLogFloor = 1e-12;

struct TrainConfig {
  Variant variant = Variant::sbp;
  std::size_t batch_size = 64;
  std::size_t total_steps = 1000;
  std::size_t d_steps_per_g_step = 1;
  /// IRGAN weight; must be > 0 exactly when variant == irgan.
  double lambda = 0.0;
  AdamHyper g_adam{2e-4, 0.5, 0.999, 1e-8};
  AdamHyper d_adam{2e-4, 0.5, 0.999, 1e-8};
  std::uint64_t seed = 0;
  GeneratorLossMode generator_loss = GeneratorLossMode::non_saturating;
  std::size_t noise_dim = 64;
  std::vector<std::size_t> g_hidden{128, 128};
  std::vector<std::size_t> d_hidden{128, 128};
  std::vector<std::size_t> sbp_depths{0};
  /// Fill wall_ms in the log; off by default so logs stay byte-reproducible.
  bool record_wall_time = false;

  void validate() const;
};

struct TrainRecord {
  std::uint64_t step = 0;  // 1-based
  double d_loss = 0.0;
  double g_loss = 0.0;
  std::optional<double> r_g;  // IRGAN only, includes lambda
  double wall_ms = 0.0;

  friend bool operator==(const TrainRecord&, const TrainRecord&) = default;
};

struct TrainLog {
  std::vector<TrainRecord> records;

  /// Header step,d_loss,g_loss,r_g,wall_ms; doubles printed with 17 digits.
  std::string to_csv() const;
  static TrainLog from_csv(const std::string& text);

  friend bool operator==(const TrainLog&, const TrainLog&) = default;
};

/// -mean(log d_real) - mean(log(1 - d_fake)), logs floored at kLogFloor.
/// Every probability must lie strictly in (0, 1).
Var d_loss(const Var& d_real, const Var& d_fake);
/// minimax: mean(log(1 - d_fake)); non_saturating: -mean(log d_fake).
Var g_loss(const Var& d_fake, GeneratorLossMode mode);
/// lambda * mean over rows of -log q_out[row, class of c_row].
Var irgan_regularizer(const Var& q_out, const Tensor& c, double lambda);

// Alternating optimizer for one (G, D) pair.  Every random draw of step s
// comes from streams derived from (seed, s), and minibatches are read from
// per-epoch permutations addressed by a global batch counter, so a trainer
// resumed from checkpoints continues exactly as an uninterrupted run would.
class Trainer {
 public:
  Trainer(TrainConfig config, LabeledDataset train, std::optional<Model> q);
  /// Resume from models saved after `steps_done` steps.
  Trainer(TrainConfig config, LabeledDataset train, std::optional<Model> q, Model g, Model d, std::uint64_t steps_done);

  /// d_steps_per_g_step discriminator updates followed by one generator update.
  TrainRecord step();

  const Model& generator() const noexcept { return g_; }
  const Model& discriminator() const noexcept { return d_; }
  const std::optional<Model>& approximator() const noexcept { return q_; }
  const TrainConfig& config() const noexcept { return config_; }
  std::uint64_t steps_done() const noexcept { return steps_done_; }

 private:
  struct Batch {
    Tensor images;
    Tensor labels;
  };

  void check_models() const;
  Batch real_batch(std::uint64_t batch_number);
  Tensor fake_conditions(std::size_t count, Rng& rng) const;
  const std::vector<std::size_t>& epoch_order(std::uint64_t epoch);

  TrainConfig config_;
  LabeledDataset train_;
  std::optional<Model> q_;
  Model g_;
  Model d_;
  std::uint64_t steps_done_ = 0;
  std::uint64_t cached_epoch_ = UINT64_MAX;
  std::vector<std::size_t> order_;
};

struct TrainResult {
  Model g;
  Model d;
  TrainLog log;
};

/// Called after each checkpoint interval and once at the end.
using CheckpointFn = std::function<void(const Trainer&, const TrainLog&)>;
/// Called after every step (progress reporting).
using ProgressFn = std::function<void(const TrainRecord&)>;

/// Runs the remaining steps of `trainer` up to config.total_steps.
TrainResult run_training(Trainer& trainer, TrainLog log = {}, std::size_t checkpoint_every = 0,
                         const CheckpointFn& on_checkpoint = {}, const ProgressFn& on_progress = {});

/// Fresh training run; q must be present exactly for IRGAN.
TrainResult train(const TrainConfig& config, const LabeledDataset& train_set, std::optional<Model> q);

}  // namespace condgan
