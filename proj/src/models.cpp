#include "condgan/models.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "condgan/conditioning.hpp"
#include "condgan/errors.hpp"

namespace condgan {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::cgan: return "cgan";
    case Variant::fcgan: return "fcgan";
    case Variant::sbp: return "sbp";
    case Variant::irgan: return "irgan";
  }
  throw ConfigError("invalid variant");
}

std::string to_string(Role r) {
  switch (r) {
    case Role::generator: return "generator";
    case Role::discriminator: return "discriminator";
    case Role::approximator: return "approximator";
  }
  throw ConfigError("invalid role");
}

std::string to_string(OutputHead h) {
  switch (h) {
    case OutputHead::sigmoid_scalar: return "sigmoid_scalar";
    case OutputHead::softmax: return "softmax";
    case OutputHead::linear: return "linear";
    case OutputHead::tanh: return "tanh";
  }
  throw ConfigError("invalid output head");
}

Variant parse_variant(std::string_view text) {
  for (auto v : kAllVariants)
    if (text == to_string(v)) return v;
  throw ConfigError("unknown variant '" + std::string(text) + "' (expected cgan, fcgan, sbp or irgan)");
}

namespace {

Role parse_role(std::string_view text) {
  for (auto r : {Role::generator, Role::discriminator, Role::approximator})
    if (text == to_string(r)) return r;
  throw DataError("unknown model role '" + std::string(text) + "'");
}

OutputHead parse_head(std::string_view text) {
  for (auto h : {OutputHead::sigmoid_scalar, OutputHead::softmax, OutputHead::linear, OutputHead::tanh})
    if (text == to_string(h)) return h;
  throw DataError("unknown output head '" + std::string(text) + "'");
}

bool has_depth(const ModelConfig& c, std::size_t depth) {
  return c.variant == Variant::sbp && std::find(c.sbp_depths.begin(), c.sbp_depths.end(), depth) != c.sbp_depths.end();
}

std::string weight_name(std::size_t l) { return "layer" + std::to_string(l) + ".weight"; }
std::string bias_name(std::size_t l) { return "layer" + std::to_string(l) + ".bias"; }

}  // namespace

void NetworkSpec::validate() const {
  if (hidden_widths.empty()) throw ConfigError("network needs at least one hidden layer");
  if (hidden_activations.size() != hidden_widths.size()) {
    throw ConfigError("network needs one activation per hidden layer");
  }
  for (auto w : hidden_widths)
    if (w == 0) throw ConfigError("hidden widths must be positive");
}

std::vector<std::pair<std::size_t, std::size_t>> ModelConfig::layer_dims() const {
  net.validate();
  if (condition_dim == 0) throw ConfigError("condition dimension must be positive");
  const std::size_t m = condition_dim;
  const std::size_t pixels = image.pixels(), d = image.channels;
  std::size_t in = 0, out = 0;
  switch (role) {
    case Role::generator:
      if (noise_dim == 0) throw ConfigError("noise dimension must be positive");
      in = noise_dim + m;
      out = image.flat();
      break;
    case Role::approximator:
      in = image.flat();
      out = m;
      break;
    case Role::discriminator:
      for (auto depth : sbp_depths) {
        if (depth > net.hidden_widths.size()) throw ConfigError("SBP depth beyond the last hidden layer");
      }
      if (variant == Variant::sbp && sbp_depths.empty()) throw ConfigError("SBP discriminator needs an injection depth");
      switch (variant) {
        case Variant::cgan:
        case Variant::fcgan: in = pixels * (d + m); break;
        case Variant::sbp: in = pixels * d * (has_depth(*this, 0) ? m : 1); break;
        case Variant::irgan: in = pixels * d; break;
      }
      out = 1;
      break;
  }
  std::vector<std::pair<std::size_t, std::size_t>> dims;
  for (std::size_t l = 0; l < net.hidden_widths.size(); ++l) {
    const std::size_t w = net.hidden_widths[l];
    dims.emplace_back(in, w);
    in = w;
    if (role == Role::discriminator) {
      if (has_depth(*this, l + 1)) in *= m;
      if (variant == Variant::fcgan) in += m;
    }
  }
  dims.emplace_back(in, out);
  return dims;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params) n += p.value.size();
  return n;
}

const Tensor& Model::param(std::string_view name) const {
  for (const auto& p : params)
    if (p.name == name) return p.value;
  throw InputError("model has no parameter '" + std::string(name) + "'");
}

Tensor& Model::param(std::string_view name) {
  return const_cast<Tensor&>(static_cast<const Model&>(*this).param(name));
}

std::string Model::fingerprint() const {
  std::vector<unsigned char> bytes;
  for (const auto& p : params) {
    bytes.insert(bytes.end(), p.name.begin(), p.name.end());
    bytes.push_back(0);
    for (auto e : p.value.shape())
      for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<unsigned char>(e >> (8 * i)));
    for (double v : p.value.data()) {
      const auto u = std::bit_cast<std::uint64_t>(v);
      for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<unsigned char>(u >> (8 * i)));
    }
  }
  return sha256_hex(bytes);
}

Model init_model(const ModelConfig& config, AdamHyper adam) {
  adam.validate();
  Model model{config, {}};
  const Rng base = Rng(config.seed).split("init").split(to_string(config.role));
  const auto dims = config.layer_dims();
  for (std::size_t l = 0; l < dims.size(); ++l) {
    const auto [fan_in, fan_out] = dims[l];
    Rng rng = base.split(l);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Tensor w({fan_in, fan_out});
    // Q starts from the uniform distribution.
    const bool zero_head = config.role == Role::approximator && l + 1 == dims.size();
    if (!zero_head)
      for (auto& v : w.data()) v = rng.uniform(-bound, bound);
    Tensor b({fan_out});
    model.params.push_back({weight_name(l), w, AdamState::fresh(w.shape(), adam)});
    model.params.push_back({bias_name(l), b, AdamState::fresh(b.shape(), adam)});
  }
  return model;
}

namespace {

ModelConfig base_config(const LabeledDataset& data, Role role, NetworkSpec net, std::uint64_t seed) {
  ModelConfig c;
  c.role = role;
  c.image = data.image_shape();
  c.condition_dim = data.condition_dim();
  c.net = std::move(net);
  c.seed = seed;
  c.dataset = data.meta.name;
  c.label_names = data.meta.label_names;
  return c;
}

}  // namespace

ModelConfig generator_config(const LabeledDataset& data, NetworkSpec net, std::size_t noise_dim, std::uint64_t seed) {
  ModelConfig c = base_config(data, Role::generator, std::move(net), seed);
  c.noise_dim = noise_dim;
  return c;
}

ModelConfig discriminator_config(const LabeledDataset& data, Variant variant, NetworkSpec net, std::uint64_t seed) {
  ModelConfig c = base_config(data, Role::discriminator, std::move(net), seed);
  c.variant = variant;
  return c;
}

ModelConfig approximator_config(const LabeledDataset& data, NetworkSpec net, std::uint64_t seed) {
  return base_config(data, Role::approximator, std::move(net), seed);
}

NetworkSpec default_generator_net(std::vector<std::size_t> widths) {
  std::vector<Activation> acts(widths.size(), Activation::relu());
  return {std::move(widths), std::move(acts), OutputHead::tanh};
}

NetworkSpec default_discriminator_net(std::vector<std::size_t> widths) {
  std::vector<Activation> acts(widths.size(), Activation::leaky_relu(0.2));
  return {std::move(widths), std::move(acts), OutputHead::sigmoid_scalar};
}

NetworkSpec default_approximator_net(std::vector<std::size_t> widths) {
  std::vector<Activation> acts(widths.size(), Activation::relu());
  return {std::move(widths), std::move(acts), OutputHead::softmax};
}

BoundParams::BoundParams(const Model& model, bool trainable) {
  vars_.reserve(model.params.size());
  for (const auto& p : model.params) vars_.push_back(Var::leaf(p.value, trainable));
}

namespace {

void check_binding(const Model& m, const BoundParams& p) {
  if (p.size() != m.params.size() || p.size() != 2 * m.config.layer_dims().size()) {
    throw ContractError("bound parameters do not match the model");
  }
}

Var dense(const BoundParams& p, std::size_t layer, const Var& h) {
  return add_bias(matmul(h, p[2 * layer]), p[2 * layer + 1]);
}

Var apply_head(OutputHead head, const Var& h) {
  switch (head) {
    case OutputHead::sigmoid_scalar: return activation(h, Activation::sigmoid());
    case OutputHead::softmax: return softmax_rows(h);
    case OutputHead::linear: return h;
    case OutputHead::tanh: return activation(h, Activation::tanh());
  }
  throw ConfigError("invalid output head");
}

void check_batch(const ModelConfig& cfg, const Tensor& x, const char* op) {
  Shape expected{x.rank() ? x.dim(0) : 0};
  const Shape img = cfg.image.shape();
  expected.insert(expected.end(), img.begin(), img.end());
  if (x.shape() != expected) {
    throw DimensionError(std::string(op) + ": images " + to_string(x.shape()) + " do not match model image shape " +
                         to_string(img));
  }
}

void check_conditions(const ModelConfig& cfg, const Tensor& c, std::size_t batch, const char* op) {
  if (c.rank() != 2 || c.dim(0) != batch || c.dim(1) != cfg.condition_dim) {
    throw DimensionError(std::string(op) + ": conditions " + to_string(c.shape()) + " expected [" + std::to_string(batch) +
                         ", " + std::to_string(cfg.condition_dim) + "]");
  }
}

}  // namespace

Var generator_forward(const Model& g, const BoundParams& p, const Var& z, const Var& c) {
  if (g.config.role != Role::generator) throw ContractError("generator_forward on a " + to_string(g.config.role));
  check_binding(g, p);
  const Tensor& zv = z.value();
  if (zv.rank() != 2 || zv.dim(1) != g.config.noise_dim) {
    throw DimensionError("generator_forward: noise " + to_string(zv.shape()) + " expected [b, " +
                         std::to_string(g.config.noise_dim) + "]");
  }
  const std::size_t b = zv.dim(0);
  check_conditions(g.config, c.value(), b, "generator_forward");
  Var h = vector_concat(z, c);
  const auto& net = g.config.net;
  for (std::size_t l = 0; l < net.hidden_widths.size(); ++l) h = activation(dense(p, l, h), net.hidden_activations[l]);
  h = apply_head(net.head, dense(p, net.hidden_widths.size(), h));
  Shape out{b};
  const Shape img = g.config.image.shape();
  out.insert(out.end(), img.begin(), img.end());
  return reshape(h, out);
}

Var discriminator_forward(const Model& d, const BoundParams& p, const Var& x, const Var& c) {
  if (d.config.role != Role::discriminator) throw ContractError("discriminator_forward on a " + to_string(d.config.role));
  check_binding(d, p);
  const ModelConfig& cfg = d.config;
  check_batch(cfg, x.value(), "discriminator_forward");
  const std::size_t b = x.value().dim(0);
  check_conditions(cfg, c.value(), b, "discriminator_forward");

  Var h;
  switch (cfg.variant) {
    case Variant::cgan:
    case Variant::fcgan: h = spatial_replicate_concat(x, c); break;
    case Variant::sbp: h = has_depth(cfg, 0) ? spatial_bilinear_pool(x, c) : x; break;
    case Variant::irgan: h = x; break;
  }
  h = reshape(h, {b, h.value().size() / b});

  const auto& net = cfg.net;
  for (std::size_t l = 0; l < net.hidden_widths.size(); ++l) {
    h = activation(dense(p, l, h), net.hidden_activations[l]);
    const std::size_t w = net.hidden_widths[l];
    if (has_depth(cfg, l + 1)) {
      h = reshape(spatial_bilinear_pool(reshape(h, {b, 1, 1, w}), c), {b, w * cfg.condition_dim});
    }
    if (cfg.variant == Variant::fcgan) {
      const std::size_t width = h.value().dim(1);
      h = reshape(spatial_replicate_concat(reshape(h, {b, 1, 1, width}), c), {b, width + cfg.condition_dim});
    }
  }
  h = apply_head(net.head, dense(p, net.hidden_widths.size(), h));
  return reshape(h, {b});
}

Var approximator_logits(const Model& q, const BoundParams& p, const Var& x) {
  if (q.config.role != Role::approximator) throw ContractError("approximator_forward on a " + to_string(q.config.role));
  check_binding(q, p);
  check_batch(q.config, x.value(), "approximator_forward");
  const std::size_t b = x.value().dim(0);
  Var h = reshape(x, {b, q.config.image.flat()});
  const auto& net = q.config.net;
  for (std::size_t l = 0; l < net.hidden_widths.size(); ++l) h = activation(dense(p, l, h), net.hidden_activations[l]);
  return dense(p, net.hidden_widths.size(), h);
}

Var approximator_forward(const Model& q, const BoundParams& p, const Var& x) {
  return softmax_rows(approximator_logits(q, p, x));
}

Tensor generate(const Model& g, const Tensor& z, const Tensor& c) {
  return generator_forward(g, BoundParams(g, false), Var::constant(z), Var::constant(c)).value();
}

Tensor discriminate(const Model& d, const Tensor& x, const Tensor& c) {
  return discriminator_forward(d, BoundParams(d, false), Var::constant(x), Var::constant(c)).value();
}

Tensor classify(const Model& q, const Tensor& x) {
  return approximator_forward(q, BoundParams(q, false), Var::constant(x)).value();
}

Tensor sample_noise(const Model& g, std::size_t count, Rng& rng) {
  Tensor z({count, g.config.noise_dim});
  for (auto& v : z.data()) v = rng.uniform(-1.0, 1.0);
  return z;
}

void apply_gradients(Model& model, const BoundParams& bound) {
  if (bound.size() != model.params.size()) throw ContractError("bound parameters do not match the model");
  for (std::size_t i = 0; i < bound.size(); ++i) {
    const auto& g = bound[i].grad();
    if (g) adam_step(model.params[i].value, *g, model.params[i].adam);
  }
}

nlohmann::json config_to_json(const ModelConfig& c) {
  nlohmann::json acts = nlohmann::json::array();
  for (const auto& a : c.net.hidden_activations) acts.push_back(a.name());
  return {
      {"role", to_string(c.role)},
      {"variant", to_string(c.variant)},
      {"image", {c.image.height, c.image.width, c.image.channels}},
      {"condition_dim", c.condition_dim},
      {"noise_dim", c.noise_dim},
      {"network", {{"hidden_widths", c.net.hidden_widths}, {"hidden_activations", acts}, {"head", to_string(c.net.head)}}},
      {"sbp_depths", c.sbp_depths},
      {"seed", c.seed},
      {"dataset", c.dataset},
      {"label_names", c.label_names},
  };
}

ModelConfig config_from_json(const nlohmann::json& j) {
  try {
    ModelConfig c;
    c.role = parse_role(j.at("role").get<std::string>());
    c.variant = parse_variant(j.at("variant").get<std::string>());
    const auto img = j.at("image").get<std::vector<std::size_t>>();
    if (img.size() != 3) throw DataError("model image shape must have three extents");
    c.image = {img[0], img[1], img[2]};
    c.condition_dim = j.at("condition_dim").get<std::size_t>();
    c.noise_dim = j.at("noise_dim").get<std::size_t>();
    const auto& net = j.at("network");
    c.net.hidden_widths = net.at("hidden_widths").get<std::vector<std::size_t>>();
    c.net.hidden_activations.clear();
    for (const auto& a : net.at("hidden_activations")) c.net.hidden_activations.push_back(Activation::parse(a.get<std::string>()));
    c.net.head = parse_head(net.at("head").get<std::string>());
    c.sbp_depths = j.at("sbp_depths").get<std::vector<std::size_t>>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.dataset = j.at("dataset").get<std::string>();
    c.label_names = j.at("label_names").get<std::vector<std::string>>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model configuration: ") + e.what());
  }
}

Container model_to_container(const Model& model, const nlohmann::json& extra) {
  Container c;
  c.header = {{"format", "condgan-model"}, {"config", config_to_json(model.config)}, {"extra", extra}};
  nlohmann::json adam = nlohmann::json::object();
  for (const auto& p : model.params) {
    adam[p.name] = {{"step", p.adam.step},
                    {"lr", p.adam.hyper.lr},
                    {"beta1", p.adam.hyper.beta1},
                    {"beta2", p.adam.hyper.beta2},
                    {"epsilon", p.adam.hyper.epsilon}};
    c.tensors.emplace_back(p.name, p.value);
  }
  for (const auto& p : model.params) {
    c.tensors.emplace_back("adam.m/" + p.name, p.adam.m);
    c.tensors.emplace_back("adam.v/" + p.name, p.adam.v);
  }
  c.header["adam"] = adam;
  return c;
}

Model model_from_container(const Container& c) {
  if (!c.header.contains("format") || c.header["format"] != "condgan-model") {
    throw DataError("container does not hold a condgan model");
  }
  Model model{config_from_json(c.header.at("config")), {}};
  const auto dims = model.config.layer_dims();
  try {
    for (std::size_t l = 0; l < dims.size(); ++l) {
      for (const auto& name : {weight_name(l), bias_name(l)}) {
        const Tensor& value = c.tensor(name);
        const Shape expected = name == weight_name(l) ? Shape{dims[l].first, dims[l].second} : Shape{dims[l].second};
        if (value.shape() != expected) {
          throw DataError("parameter " + name + " has shape " + to_string(value.shape()) + ", expected " +
                          to_string(expected));
        }
        const auto& a = c.header.at("adam").at(name);
        AdamState state{a.at("step").get<std::uint64_t>(), c.tensor("adam.m/" + name), c.tensor("adam.v/" + name),
                        AdamHyper{a.at("lr").get<double>(), a.at("beta1").get<double>(), a.at("beta2").get<double>(),
                                  a.at("epsilon").get<double>()}};
        model.params.push_back({name, value, std::move(state)});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed optimizer state: ") + e.what());
  }
  return model;
}

void save_model(const std::filesystem::path& path, const Model& model, const nlohmann::json& extra) {
  write_container(path, model_to_container(model, extra));
}

Model load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("checkpoint not found: " + path.string());
  return model_from_container(read_container(path));
}

double accuracy(const Model& q, const LabeledDataset& data) {
  const Tensor probs = classify(q, data.images);
  const auto labels = data.label_indices();
  const std::size_t m = probs.dim(1);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double* row = probs.data().data() + i * m;
    const auto best = static_cast<std::size_t>(std::max_element(row, row + m) - row);
    if (best == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

PretrainResult pretrain_approximator(const LabeledDataset& train, const LabeledDataset& valid, const NetworkSpec& net,
                                     const PretrainOptions& options) {
  if (train.count() == 0 || valid.count() == 0) throw InputError("pretraining needs non-empty datasets");
  if (train.condition_dim() != valid.condition_dim() || train.image_shape() != valid.image_shape()) {
    throw InputError("train and validation sets disagree on image shape or condition dimension");
  }
  if (options.batch_size == 0 || options.eval_every == 0) throw ConfigError("batch_size and eval_every must be positive");
  Model q = init_model(approximator_config(train, net, options.seed), options.adam);
  PretrainResult result{q, accuracy(q, valid), 0, {}};
  const Rng batches = Rng(options.seed).split("pretrain-batches");
  const std::size_t stride = train.image_shape().flat();
  const std::size_t m = train.condition_dim();
  for (std::size_t step = 1; step <= options.steps; ++step) {
    Rng rng = batches.split(step);
    const std::size_t b = options.batch_size;
    Shape ishape = train.images.shape();
    ishape[0] = b;
    Tensor x(ishape);
    Tensor y({b, m});
    for (std::size_t i = 0; i < b; ++i) {
      const std::size_t row = rng.below(train.count());
      std::copy_n(train.images.data().data() + row * stride, stride, x.data().data() + i * stride);
      std::copy_n(train.labels.data().data() + row * m, m, y.data().data() + i * m);
    }
    BoundParams bound(q, true);
    Var loss = softmax_cross_entropy(approximator_logits(q, bound, Var::constant(x)), y);
    backward(loss);
    apply_gradients(q, bound);
    result.train_losses.push_back(loss.value().item());
    if (step % options.eval_every == 0 || step == options.steps) {
      const double acc = accuracy(q, valid);
      if (acc > result.valid_accuracy) {
        result.valid_accuracy = acc;
        result.best_step = step;
        result.model = q;
      }
    }
  }
  return result;
}

}  // namespace condgan
