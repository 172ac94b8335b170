#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "condgan/adam.hpp"
#include "condgan/autodiff.hpp"
#include "condgan/checkpoint.hpp"
#include "condgan/data.hpp"
#include "condgan/ops.hpp"

namespace condgan {

enum class Variant { cgan, fcgan, sbp, irgan };
enum class Role { generator, discriminator, approximator };
enum class OutputHead { sigmoid_scalar, softmax, linear, tanh };

std::string to_string(Variant v);
std::string to_string(Role r);
std::string to_string(OutputHead h);
Variant parse_variant(std::string_view text);
inline constexpr Variant kAllVariants[] = {Variant::cgan, Variant::fcgan, Variant::sbp, Variant::irgan};

struct NetworkSpec {
  std::vector<std::size_t> hidden_widths{128, 128};
  std::vector<Activation> hidden_activations{Activation::relu(), Activation::relu()};
  OutputHead head = OutputHead::linear;

  /// ConfigError unless there is at least one hidden layer with one
  /// activation per layer and all widths positive.
  void validate() const;
};

struct ModelConfig {
  Role role = Role::generator;
  /// Conditioning variant; for generators it records the training variant only.
  Variant variant = Variant::cgan;
  ImageShape image;
  std::size_t condition_dim = 1;
  std::size_t noise_dim = 64;  // generator input noise
  NetworkSpec net;
  /// Discriminator SBP injection points: 0 is the input image, l > 0 the
  /// output of hidden layer l (treated as a 1x1xwidth map).
  std::vector<std::size_t> sbp_depths{0};
  std::uint64_t seed = 0;
  std::string dataset;
  std::vector<std::string> label_names;

  /// (fan_in, fan_out) of every dense layer, output layer last.
  std::vector<std::pair<std::size_t, std::size_t>> layer_dims() const;
};

struct Parameter {
  std::string name;
  Tensor value;
  AdamState adam;
};

struct Model {
  ModelConfig config;
  std::vector<Parameter> params;

  std::size_t parameter_count() const;
  const Tensor& param(std::string_view name) const;
  Tensor& param(std::string_view name);
  /// sha256 over names, shapes and values; used to assert frozen parameters.
  std::string fingerprint() const;
};

/// Fan-in scaled uniform weights U(-1/sqrt(fan_in), 1/sqrt(fan_in)), zero
/// biases, fresh Adam state with `adam`.  The approximator's output layer
/// starts at zero so an untrained Q predicts the uniform distribution.
Model init_model(const ModelConfig& config, AdamHyper adam = {});

ModelConfig generator_config(const LabeledDataset& data, NetworkSpec net, std::size_t noise_dim, std::uint64_t seed);
ModelConfig discriminator_config(const LabeledDataset& data, Variant variant, NetworkSpec net, std::uint64_t seed);
ModelConfig approximator_config(const LabeledDataset& data, NetworkSpec net, std::uint64_t seed);

/// Default architectures: G relu hidden layers with tanh head, D leaky_relu(0.2)
/// with sigmoid head, Q relu with softmax head.
NetworkSpec default_generator_net(std::vector<std::size_t> widths = {128, 128});
NetworkSpec default_discriminator_net(std::vector<std::size_t> widths = {128, 128});
NetworkSpec default_approximator_net(std::vector<std::size_t> widths = {64});

// Model parameters as graph leaves for one forward pass.
class BoundParams {
 public:
  BoundParams(const Model& model, bool trainable);

  const Var& operator[](std::size_t i) const { return vars_[i]; }
  std::size_t size() const noexcept { return vars_.size(); }

 private:
  std::vector<Var> vars_;
};

/// z [b, k], c [b, m] -> images [b, h, w, d] in (-1, 1).
Var generator_forward(const Model& g, const BoundParams& p, const Var& z, const Var& c);
/// x [b, h, w, d], c [b, m] -> probabilities [b] in (0, 1).  IRGAN ignores c.
Var discriminator_forward(const Model& d, const BoundParams& p, const Var& x, const Var& c);
/// x [b, h, w, d] -> class distribution [b, m].
Var approximator_forward(const Model& q, const BoundParams& p, const Var& x);
/// Pre-softmax logits of Q.
Var approximator_logits(const Model& q, const BoundParams& p, const Var& x);

// Value-level conveniences (no gradient tracking).
Tensor generate(const Model& g, const Tensor& z, const Tensor& c);
Tensor discriminate(const Model& d, const Tensor& x, const Tensor& c);
Tensor classify(const Model& q, const Tensor& x);

/// Uniform(-1, 1) noise [count, noise_dim].
Tensor sample_noise(const Model& g, std::size_t count, Rng& rng);

/// Adam step on every parameter whose bound leaf received a gradient.
void apply_gradients(Model& model, const BoundParams& bound);

nlohmann::json config_to_json(const ModelConfig& config);
ModelConfig config_from_json(const nlohmann::json& j);
Container model_to_container(const Model& model, const nlohmann::json& extra = nlohmann::json::object());
Model model_from_container(const Container& c);
void save_model(const std::filesystem::path& path, const Model& model,
                const nlohmann::json& extra = nlohmann::json::object());
Model load_model(const std::filesystem::path& path);

// ---- Approximator pretraining ------------------------------------------------

struct PretrainOptions {
  std::size_t steps = 1500;
  std::size_t batch_size = 64;
  std::size_t eval_every = 50;
  AdamHyper adam{1e-3, 0.9, 0.999, 1e-8};
  std::uint64_t seed = 0;
};

struct PretrainResult {
  Model model;
  double valid_accuracy = 0.0;
  std::size_t best_step = 0;
  std::vector<double> train_losses;  // one per step
};

double accuracy(const Model& q, const LabeledDataset& data);

/// Trains Q by Adam on softmax cross-entropy and returns the parameters with
/// the best validation accuracy seen at the evaluation checkpoints (the
/// initial parameters included).
PretrainResult pretrain_approximator(const LabeledDataset& train, const LabeledDataset& valid, const NetworkSpec& net,
                                     const PretrainOptions& options);

}  // namespace condgan
