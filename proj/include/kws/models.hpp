#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kws/optim.hpp"
#include "kws/tape.hpp"

namespace kws {

enum class Variant { LowLatency, MnistCnn, ShallowCrm, DeepCrm };
enum class Activation { Relu, Elu, Sigmoid, Tanh };

std::string_view variant_name(Variant v);
Variant variant_from_name(std::string_view name);
std::string_view activation_name(Activation a);
Activation activation_from_name(std::string_view name);

struct ModelSpec {
  Variant variant = Variant::LowLatency;
  int input_height = 40;
  int input_width = 98;
  int num_classes = 12;
  Activation activation = Activation::Relu;
  double keep_prob = 1.0;  // dropout keep probability; 1 disables

  // low-latency: conv(filter, stride, channels) -> linear bottleneck ->
  // dense -> softmax
  int ll_filter_size = 7;
  int ll_stride = 3;
  int ll_channels = 3;
  int ll_bottleneck = 42;
  int ll_dense = 100;
  bool ll_freq_stride_only = false;  // stride only along the frequency rows

  // conv-relu-maxpool stacks
  std::vector<int> crm_filters;
  int crm_dense = 256;
  std::vector<int> dropout_blocks;  // 1-based C-R-M blocks with dropout after the pool
  bool dropout_dense = true;        // dropout after the hidden dense layer
};

ModelSpec low_latency_spec(int input_height, int input_width);
ModelSpec mnist_cnn_spec();
ModelSpec shallow_crm_spec(int input_height, int input_width,
                           std::vector<int> filters = {16, 32, 64},
                           Activation act = Activation::Relu);
ModelSpec deep_crm_spec(int input_height, int input_width,
                        std::vector<int> filters = {16, 32, 64, 128, 128},
                        Activation act = Activation::Relu);

std::string model_spec_to_text(const ModelSpec& spec);
ModelSpec model_spec_from_text(const std::string& text);

// Closed-form parameter count derived from the ModelSpec fields alone; the
// independent path against Network::parameter_count().
long long count_params(const ModelSpec& spec);

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
};

namespace detail {

struct LayerStep {
  enum class Kind { Conv, Pool, Activation, Dropout, Flatten, Dense };
  Kind kind = Kind::Conv;
  int w = -1, b = -1;  // parameter indices
  int stride_h = 1, stride_w = 1;
};

struct NetworkPlan {
  std::vector<LayerStep> steps;
  std::vector<std::pair<std::string, std::vector<int>>> param_shapes;
};

// Expands a spec into layer steps plus parameter shapes, validating every
// intermediate spatial extent along the way.
NetworkPlan plan_network(const ModelSpec& spec);

}  // namespace detail

template <typename T>
class Network {
 public:
  explicit Network(const ModelSpec& spec) : spec_(spec) {
    const detail::NetworkPlan plan = detail::plan_network(spec);
    steps_ = plan.steps;
    for (const auto& [name, shape] : plan.param_shapes)
      params_.push_back({name, Tensor<T>(shape)});
  }

  const ModelSpec& spec() const { return spec_; }
  std::vector<Parameter<T>>& params() { return params_; }
  const std::vector<Parameter<T>>& params() const { return params_; }

  long long parameter_count() const {
    long long n = 0;
    for (const auto& p : params_) n += p.value.numel();
    return n;
  }

  struct Forward {
    Var<T> logits;
    std::vector<Var<T>> param_vars;  // aligned with params()
  };

  // batch is [n, input_height, input_width, 1]. dropout_seed only matters
  // when training and keep_prob < 1.
  Forward forward(Tape<T>& tape, const Tensor<T>& batch, bool training,
                  uint64_t dropout_seed = 0, bool track_input = false,
                  Var<T>* input_var = nullptr) const {
    if (batch.shape.size() != 4 || batch.shape[1] != spec_.input_height ||
        batch.shape[2] != spec_.input_width || batch.shape[3] != 1)
      throw ShapeError("batch " + shape_str(batch.shape) + " does not match model input " +
                       std::to_string(spec_.input_height) + "x" +
                       std::to_string(spec_.input_width) + "x1");
    Forward fw;
    fw.param_vars.reserve(params_.size());
    for (const auto& p : params_) fw.param_vars.push_back(tape.input(p.value, true));
    Var<T> x = tape.input(batch, track_input);
    if (input_var) *input_var = x;
    const int n = batch.shape[0];
    int step_index = 0;
    for (const detail::LayerStep& s : steps_) {
      switch (s.kind) {
        case detail::LayerStep::Kind::Conv:
          x = conv2d(tape, x, fw.param_vars[static_cast<size_t>(s.w)], s.stride_h, s.stride_w,
                     Padding::Same);
          x = bias_add(tape, x, fw.param_vars[static_cast<size_t>(s.b)]);
          break;
        case detail::LayerStep::Kind::Pool:
          x = maxpool2d(tape, x);
          break;
        case detail::LayerStep::Kind::Activation:
          x = apply_activation(tape, x);
          break;
        case detail::LayerStep::Kind::Dropout:
          x = dropout(tape, x, spec_.keep_prob, training,
                      mix64(dropout_seed ^ mix64(static_cast<uint64_t>(step_index) + 0x0D0)));
          break;
        case detail::LayerStep::Kind::Flatten:
          x = reshape(tape, x,
                      {n, static_cast<int>(numel_of(tape.shape(x)) / n)});
          break;
        case detail::LayerStep::Kind::Dense:
          x = dense(tape, x, fw.param_vars[static_cast<size_t>(s.w)],
                    fw.param_vars[static_cast<size_t>(s.b)]);
          break;
      }
      ++step_index;
    }
    fw.logits = x;
    return fw;
  }

  // Inference logits, no gradient bookkeeping.
  Tensor<T> logits(const Tensor<T>& batch) const {
    Tape<T> tape;
    const Forward fw = forward_no_grad(tape, batch);
    return tape.value_tensor(fw.logits);
  }

 private:
  Forward forward_no_grad(Tape<T>& tape, const Tensor<T>& batch) const {
    // parameters enter without requires_grad for cheap evaluation
    if (batch.shape.size() != 4 || batch.shape[1] != spec_.input_height ||
        batch.shape[2] != spec_.input_width || batch.shape[3] != 1)
      throw ShapeError("batch " + shape_str(batch.shape) + " does not match model input " +
                       std::to_string(spec_.input_height) + "x" +
                       std::to_string(spec_.input_width) + "x1");
    Forward fw;
    for (const auto& p : params_) fw.param_vars.push_back(tape.input(p.value, false));
    Var<T> x = tape.input(batch, false);
    const int n = batch.shape[0];
    for (const detail::LayerStep& s : steps_) {
      switch (s.kind) {
        case detail::LayerStep::Kind::Conv:
          x = conv2d(tape, x, fw.param_vars[static_cast<size_t>(s.w)], s.stride_h, s.stride_w,
                     Padding::Same);
          x = bias_add(tape, x, fw.param_vars[static_cast<size_t>(s.b)]);
          break;
        case detail::LayerStep::Kind::Pool:
          x = maxpool2d(tape, x);
          break;
        case detail::LayerStep::Kind::Activation:
          x = apply_activation(tape, x);
          break;
        case detail::LayerStep::Kind::Dropout:
          break;  // identity at inference
        case detail::LayerStep::Kind::Flatten:
          x = reshape(tape, x, {n, static_cast<int>(numel_of(tape.shape(x)) / n)});
          break;
        case detail::LayerStep::Kind::Dense:
          x = dense(tape, x, fw.param_vars[static_cast<size_t>(s.w)],
                    fw.param_vars[static_cast<size_t>(s.b)]);
          break;
      }
    }
    fw.logits = x;
    return fw;
  }

  Var<T> apply_activation(Tape<T>& tape, Var<T> x) const {
    switch (spec_.activation) {
      case Activation::Relu: return relu(tape, x);
      case Activation::Elu: return elu(tape, x);
      case Activation::Sigmoid: return sigmoid(tape, x);
      case Activation::Tanh: return tanh_act(tape, x);
    }
    throw ParamError("bad activation");
  }

  ModelSpec spec_;
  std::vector<detail::LayerStep> steps_;
  std::vector<Parameter<T>> params_;
};

// Weights (>= 2-D) by the chosen scheme, biases to zero. One sequential RNG
// across parameters in declaration order.
template <typename T>
void initialize_network(Network<T>& net, const InitSpec& init) {
  Rng rng(init.seed);
  for (Parameter<T>& p : net.params()) {
    if (p.value.shape.size() < 2) {
      std::fill(p.value.data.begin(), p.value.data.end(), T{});
    } else if (init.kind == InitKind::Xavier) {
      fill_xavier(p.value, rng);
    } else {
      fill_truncated_normal(p.value, init.stddev, rng);
    }
  }
}

struct CheckpointInfo {
  ModelSpec spec;
  uint64_t seed = 0;
  int epoch = 0;
};

void save_checkpoint(const Network<float>& net, const std::filesystem::path& path, uint64_t seed,
                     int epoch);

struct LoadedCheckpoint {
  CheckpointInfo info;
  Network<float> network;
};
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

// Loads into an existing network; the checkpoint's spec must match exactly.
void restore_checkpoint(Network<float>& target, const std::filesystem::path& path);

}  // namespace kws
