#include "kws/models.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace kws {

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoi(item));
  return out;
}

std::string join_int_list(const std::vector<int>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

constexpr char kCheckpointMagic[4] = {'K', 'W', 'S', 'C'};
constexpr uint32_t kCheckpointVersion = 1;

template <typename T>
void write_raw(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_raw(std::ifstream& in, T& v, const std::string& what) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("checkpoint truncated while reading " + what);
}

}  // namespace

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::LowLatency: return "low-latency";
    case Variant::MnistCnn: return "mnist";
    case Variant::ShallowCrm: return "shallow";
    case Variant::DeepCrm: return "deep";
  }
  throw ParamError("bad variant");
}

Variant variant_from_name(std::string_view name) {
  if (name == "low-latency") return Variant::LowLatency;
  if (name == "mnist") return Variant::MnistCnn;
  if (name == "shallow") return Variant::ShallowCrm;
  if (name == "deep") return Variant::DeepCrm;
  throw ParamError("unknown model variant '" + std::string(name) + "'");
}

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Elu: return "elu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
  }
  throw ParamError("bad activation");
}

Activation activation_from_name(std::string_view name) {
  if (name == "relu") return Activation::Relu;
  if (name == "elu") return Activation::Elu;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "tanh") return Activation::Tanh;
  throw ParamError("unknown activation '" + std::string(name) + "'");
}

ModelSpec low_latency_spec(int input_height, int input_width) {
  ModelSpec s;
  s.variant = Variant::LowLatency;
  s.input_height = input_height;
  s.input_width = input_width;
  return s;
}

ModelSpec mnist_cnn_spec() {
  ModelSpec s;
  s.variant = Variant::MnistCnn;
  s.input_height = 28;
  s.input_width = 28;
  return s;
}

ModelSpec shallow_crm_spec(int input_height, int input_width, std::vector<int> filters,
                           Activation act) {
  ModelSpec s;
  s.variant = Variant::ShallowCrm;
  s.input_height = input_height;
  s.input_width = input_width;
  s.crm_filters = std::move(filters);
  s.activation = act;
  return s;
}

ModelSpec deep_crm_spec(int input_height, int input_width, std::vector<int> filters,
                        Activation act) {
  ModelSpec s = shallow_crm_spec(input_height, input_width, std::move(filters), act);
  s.variant = Variant::DeepCrm;
  return s;
}

namespace detail {

NetworkPlan plan_network(const ModelSpec& spec) {
  using Kind = LayerStep::Kind;
  if (spec.input_height < 1 || spec.input_width < 1)
    throw ShapeError("input dims must be positive");
  if (spec.num_classes < 2) throw ParamError("need at least two classes");
  if (spec.keep_prob <= 0.0 || spec.keep_prob > 1.0)
    throw ParamError("keep_prob must be in (0, 1]");

  NetworkPlan plan;
  int h = spec.input_height, w = spec.input_width, c = 1;
  int param = 0;
  const auto add_param = [&](const std::string& name, std::vector<int> shape) {
    plan.param_shapes.emplace_back(name, std::move(shape));
    return param++;
  };
  const auto add_conv = [&](const std::string& name, int k, int sh, int sw, int oc) {
    LayerStep s;
    s.kind = Kind::Conv;
    s.stride_h = sh;
    s.stride_w = sw;
    s.w = add_param(name + "/w", {k, k, c, oc});
    s.b = add_param(name + "/b", {oc});
    plan.steps.push_back(s);
    h = ceil_div(h, sh);
    w = ceil_div(w, sw);
    c = oc;
  };
  const auto add_pool = [&] {
    if (h < 2 && w < 2)
      throw ShapeError("spatial extent collapsed to 1x1 before a maxpool");
    plan.steps.push_back({Kind::Pool});
    h = ceil_div(h, 2);
    w = ceil_div(w, 2);
  };
  const auto add_act = [&] { plan.steps.push_back({Kind::Activation}); };
  const auto add_dropout = [&] { plan.steps.push_back({Kind::Dropout}); };
  const auto add_flatten = [&] { plan.steps.push_back({Kind::Flatten}); };
  const auto add_dense = [&](const std::string& name, int in, int out) {
    LayerStep s;
    s.kind = Kind::Dense;
    s.w = add_param(name + "/w", {in, out});
    s.b = add_param(name + "/b", {out});
    plan.steps.push_back(s);
  };

  switch (spec.variant) {
    case Variant::LowLatency: {
      if (spec.input_height < spec.ll_filter_size || spec.input_width < spec.ll_filter_size)
        throw ShapeError("input smaller than the low-latency conv filter");
      const int sh = spec.ll_stride;
      const int sw = spec.ll_freq_stride_only ? 1 : spec.ll_stride;
      add_conv("conv1", spec.ll_filter_size, sh, sw, spec.ll_channels);
      add_act();
      add_flatten();
      const int flat = h * w * c;
      add_dense("bottleneck", flat, spec.ll_bottleneck);  // linear, no activation
      add_dense("dense1", spec.ll_bottleneck, spec.ll_dense);
      add_act();
      add_dense("logits", spec.ll_dense, spec.num_classes);
      break;
    }
    case Variant::MnistCnn: {
      if (spec.input_height != 28 || spec.input_width != 28)
        throw ShapeError("mnist variant requires 28x28 input, got " +
                         std::to_string(spec.input_height) + "x" +
                         std::to_string(spec.input_width));
      add_conv("conv1", 5, 1, 1, 32);
      add_act();
      add_pool();
      add_conv("conv2", 5, 1, 1, 64);
      add_act();
      add_pool();
      add_flatten();
      add_dense("dense1", h * w * c, 1024);
      add_act();
      add_dropout();
      add_dense("logits", 1024, spec.num_classes);
      break;
    }
    case Variant::ShallowCrm:
    case Variant::DeepCrm: {
      std::vector<int> filters = spec.crm_filters;
      if (filters.empty())
        filters = spec.variant == Variant::ShallowCrm ? std::vector<int>{16, 32, 64}
                                                      : std::vector<int>{16, 32, 64, 128, 128};
      const size_t expected = spec.variant == Variant::ShallowCrm ? 3 : 5;
      if (filters.size() != expected)
        throw ParamError(std::string(variant_name(spec.variant)) + " variant takes " +
                         std::to_string(expected) + " filter counts");
      for (size_t i = 0; i < filters.size(); ++i) {
        add_conv("conv" + std::to_string(i + 1), 3, 1, 1, filters[i]);
        add_act();
        add_pool();
        for (const int block : spec.dropout_blocks)
          if (block == static_cast<int>(i + 1)) add_dropout();
      }
      add_flatten();
      add_dense("dense1", h * w * c, spec.crm_dense);
      add_act();
      if (spec.dropout_dense) add_dropout();
      add_dense("logits", spec.crm_dense, spec.num_classes);
      break;
    }
  }
  return plan;
}

}  // namespace detail

long long count_params(const ModelSpec& spec) {
  const auto conv_params = [](int k, int in_c, int out_c) {
    return static_cast<long long>(k) * k * in_c * out_c + out_c;
  };
  const auto dense_params = [](long long m, long long n) { return m * n + n; };
  switch (spec.variant) {
    case Variant::LowLatency: {
      const int sh = spec.ll_stride;
      const int sw = spec.ll_freq_stride_only ? 1 : spec.ll_stride;
      const long long flat = static_cast<long long>(ceil_div(spec.input_height, sh)) *
                             ceil_div(spec.input_width, sw) * spec.ll_channels;
      return conv_params(spec.ll_filter_size, 1, spec.ll_channels) +
             dense_params(flat, spec.ll_bottleneck) +
             dense_params(spec.ll_bottleneck, spec.ll_dense) +
             dense_params(spec.ll_dense, spec.num_classes);
    }
    case Variant::MnistCnn: {
      const int side = ceil_div(ceil_div(spec.input_height, 2), 2);
      return conv_params(5, 1, 32) + conv_params(5, 32, 64) +
             dense_params(static_cast<long long>(side) * side * 64, 1024) +
             dense_params(1024, spec.num_classes);
    }
    case Variant::ShallowCrm:
    case Variant::DeepCrm: {
      std::vector<int> filters = spec.crm_filters;
      if (filters.empty())
        filters = spec.variant == Variant::ShallowCrm ? std::vector<int>{16, 32, 64}
                                                      : std::vector<int>{16, 32, 64, 128, 128};
      long long total = 0;
      int h = spec.input_height, w = spec.input_width, c = 1;
      for (const int f : filters) {
        total += conv_params(3, c, f);
        h = ceil_div(h, 2);
        w = ceil_div(w, 2);
        c = f;
      }
      total += dense_params(static_cast<long long>(h) * w * c, spec.crm_dense);
      total += dense_params(spec.crm_dense, spec.num_classes);
      return total;
    }
  }
  throw ParamError("bad variant");
}

std::string model_spec_to_text(const ModelSpec& spec) {
  std::ostringstream out;
  char keep[40];
  std::snprintf(keep, sizeof(keep), "%.17g", spec.keep_prob);
  out << "variant=" << variant_name(spec.variant) << "\n"
      << "input_height=" << spec.input_height << "\n"
      << "input_width=" << spec.input_width << "\n"
      << "num_classes=" << spec.num_classes << "\n"
      << "activation=" << activation_name(spec.activation) << "\n"
      << "keep_prob=" << keep << "\n"
      << "ll_filter_size=" << spec.ll_filter_size << "\n"
      << "ll_stride=" << spec.ll_stride << "\n"
      << "ll_channels=" << spec.ll_channels << "\n"
      << "ll_bottleneck=" << spec.ll_bottleneck << "\n"
      << "ll_dense=" << spec.ll_dense << "\n"
      << "ll_freq_stride_only=" << (spec.ll_freq_stride_only ? 1 : 0) << "\n"
      << "crm_filters=" << join_int_list(spec.crm_filters) << "\n"
      << "crm_dense=" << spec.crm_dense << "\n"
      << "dropout_blocks=" << join_int_list(spec.dropout_blocks) << "\n"
      << "dropout_dense=" << (spec.dropout_dense ? 1 : 0) << "\n";
  return out.str();
}

ModelSpec model_spec_from_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("bad spec line: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  const auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw FormatError("spec text missing key " + key);
    return it->second;
  };
  ModelSpec spec;
  spec.variant = variant_from_name(get("variant"));
  spec.input_height = std::stoi(get("input_height"));
  spec.input_width = std::stoi(get("input_width"));
  spec.num_classes = std::stoi(get("num_classes"));
  spec.activation = activation_from_name(get("activation"));
  spec.keep_prob = std::stod(get("keep_prob"));
  spec.ll_filter_size = std::stoi(get("ll_filter_size"));
  spec.ll_stride = std::stoi(get("ll_stride"));
  spec.ll_channels = std::stoi(get("ll_channels"));
  spec.ll_bottleneck = std::stoi(get("ll_bottleneck"));
  spec.ll_dense = std::stoi(get("ll_dense"));
  spec.ll_freq_stride_only = get("ll_freq_stride_only") == "1";
  spec.crm_filters = parse_int_list(get("crm_filters"));
  spec.crm_dense = std::stoi(get("crm_dense"));
  spec.dropout_blocks = parse_int_list(get("dropout_blocks"));
  spec.dropout_dense = get("dropout_dense") == "1";
  return spec;
}

void save_checkpoint(const Network<float>& net, const std::filesystem::path& path, uint64_t seed,
                     int epoch) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kCheckpointMagic, 4);
  write_raw(out, kCheckpointVersion);
  const std::string spec_text = model_spec_to_text(net.spec());
  write_raw(out, static_cast<uint32_t>(spec_text.size()));
  out.write(spec_text.data(), static_cast<std::streamsize>(spec_text.size()));
  write_raw(out, seed);
  write_raw(out, static_cast<uint32_t>(epoch));
  write_raw(out, static_cast<uint32_t>(net.params().size()));
  for (const Parameter<float>& p : net.params()) {
    write_raw(out, static_cast<uint16_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    write_raw(out, static_cast<uint8_t>(p.value.shape.size()));
    for (const int d : p.value.shape) write_raw(out, static_cast<uint32_t>(d));
    out.write(reinterpret_cast<const char*>(p.value.data.data()),
              static_cast<std::streamsize>(p.value.data.size() * sizeof(float)));
  }
  if (!out) throw IoError("write failed for " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw FormatError(path.string() + ": not a checkpoint file");
  uint32_t version = 0;
  read_raw(in, version, "version");
  if (version != kCheckpointVersion)
    throw FormatError(path.string() + ": unsupported checkpoint version " +
                      std::to_string(version));
  uint32_t spec_len = 0;
  read_raw(in, spec_len, "spec length");
  if (spec_len > 1 << 20) throw FormatError(path.string() + ": implausible spec length");
  std::string spec_text(spec_len, '\0');
  in.read(spec_text.data(), spec_len);
  if (!in) throw FormatError(path.string() + ": truncated spec text");

  CheckpointInfo info;
  info.spec = model_spec_from_text(spec_text);
  uint32_t epoch = 0;
  read_raw(in, info.seed, "seed");
  read_raw(in, epoch, "epoch");
  info.epoch = static_cast<int>(epoch);

  Network<float> net(info.spec);
  uint32_t n_tensors = 0;
  read_raw(in, n_tensors, "tensor count");
  if (n_tensors != net.params().size())
    throw FormatError(path.string() + ": tensor count does not match the embedded spec");
  for (Parameter<float>& p : net.params()) {
    uint16_t name_len = 0;
    read_raw(in, name_len, "tensor name length");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw FormatError(path.string() + ": truncated tensor name");
    uint8_t ndim = 0;
    read_raw(in, ndim, "tensor rank");
    std::vector<int> shape(ndim);
    for (uint8_t d = 0; d < ndim; ++d) {
      uint32_t dim = 0;
      read_raw(in, dim, "tensor dim");
      shape[d] = static_cast<int>(dim);
    }
    if (name != p.name || shape != p.value.shape)
      throw FormatError(path.string() + ": tensor " + name + " " + shape_str(shape) +
                        " does not match expected " + p.name + " " + shape_str(p.value.shape));
    in.read(reinterpret_cast<char*>(p.value.data.data()),
            static_cast<std::streamsize>(p.value.data.size() * sizeof(float)));
    if (!in) throw FormatError(path.string() + ": truncated tensor data");
  }
  return {info, std::move(net)};
}

void restore_checkpoint(Network<float>& target, const std::filesystem::path& path) {
  LoadedCheckpoint loaded = load_checkpoint(path);
  if (model_spec_to_text(loaded.info.spec) != model_spec_to_text(target.spec()))
    throw ConfigError("checkpoint " + path.string() + " holds a " +
                      std::string(variant_name(loaded.info.spec.variant)) + " " +
                      std::to_string(loaded.info.spec.input_height) + "x" +
                      std::to_string(loaded.info.spec.input_width) +
                      " model incompatible with the requested spec");
  for (size_t i = 0; i < target.params().size(); ++i)
    target.params()[i].value = loaded.network.params()[i].value;
}

}  // namespace kws
