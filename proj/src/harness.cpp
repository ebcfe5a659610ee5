#include "kws/harness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "kws/svg.hpp"

namespace kws {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Tensor<float> gather_batch(const FeatureSet& set, const std::vector<size_t>& order, size_t first,
                           size_t count, std::vector<int>& labels) {
  const size_t pixels = static_cast<size_t>(set.height) * set.width;
  Tensor<float> batch({static_cast<int>(count), set.height, set.width, 1});
  labels.resize(count);
  for (size_t i = 0; i < count; ++i) {
    const FeatureImage& img = set.images[order[first + i]];
    std::copy(img.pixels.begin(), img.pixels.end(), batch.data.begin() + i * pixels);
    labels[i] = img.label;
  }
  return batch;
}

int argmax_row(const float* row, int n) {
  int best = 0;
  for (int j = 1; j < n; ++j)
    if (row[j] > row[best]) best = j;
  return best;
}

FeatureSet apply_vat(const FeatureSet& train_set, const TrainConfig& config,
                     const Network<float>& net) {
  FeatureSet effective;
  switch (config.vat) {
    case VatMode::Off:
      effective = train_set;
      break;
    case VatMode::Sign:
    case VatMode::Std:
    case VatMode::Both: {
      AugmentConfig aug;
      aug.sign_epsilon = config.sign_epsilon;
      aug.sign_enabled = config.vat != VatMode::Std;
      aug.std_enabled = config.vat != VatMode::Sign;
      effective = augment_dataset(train_set, aug);
      break;
    }
    case VatMode::Fgsm: {
      effective = train_set;
      for (const FeatureImage& img : train_set.images)
        effective.images.push_back(fgsm_perturb(net, img, img.label, config.sign_epsilon));
      break;
    }
  }
  if (config.vat_equal_budget && config.vat != VatMode::Off) {
    std::vector<size_t> idx(effective.images.size());
    std::iota(idx.begin(), idx.end(), size_t{0});
    Rng rng(mix64(config.seed ^ 0xEB0DEull));
    rng.shuffle(idx.begin(), idx.end());
    idx.resize(train_set.images.size());
    std::sort(idx.begin(), idx.end());
    FeatureSet sampled;
    sampled.mode = effective.mode;
    sampled.height = effective.height;
    sampled.width = effective.width;
    for (const size_t i : idx) sampled.images.push_back(effective.images[i]);
    effective = std::move(sampled);
  }
  return effective;
}

}  // namespace

std::string_view vat_mode_name(VatMode mode) {
  switch (mode) {
    case VatMode::Off: return "off";
    case VatMode::Sign: return "sign";
    case VatMode::Fgsm: return "fgsm";
    case VatMode::Std: return "std";
    case VatMode::Both: return "both";
  }
  throw ParamError("bad vat mode");
}

VatMode vat_mode_from_name(std::string_view name) {
  if (name == "off") return VatMode::Off;
  if (name == "sign") return VatMode::Sign;
  if (name == "fgsm") return VatMode::Fgsm;
  if (name == "std") return VatMode::Std;
  if (name == "both") return VatMode::Both;
  throw ParamError("unknown vat mode '" + std::string(name) + "'");
}

std::string_view exit_reason_name(ExitReason r) {
  return r == ExitReason::Threshold ? "THRESHOLD" : "MAX_EPOCHS";
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (learning_rate <= 0.0) throw ConfigError("learning rate must be positive");
  if (cost_threshold && *cost_threshold <= 0.0)
    throw ConfigError("cost_threshold must be positive when set");
  if (sign_epsilon < 0.0) throw ConfigError("sign_epsilon must be >= 0");
  if (init_stddev <= 0.0) throw ConfigError("init stddev must be positive");
}

EvalResult evaluate(const Network<float>& net, const FeatureSet& set) {
  if (set.images.empty()) throw ParamError("evaluate needs a nonempty example set");
  const size_t batch_size = 128;
  std::vector<size_t> order(set.images.size());
  std::iota(order.begin(), order.end(), size_t{0});
  size_t correct = 0;
  double total_cost = 0.0;
  const int classes = net.spec().num_classes;
  for (size_t first = 0; first < order.size(); first += batch_size) {
    const size_t count = std::min(batch_size, order.size() - first);
    std::vector<int> labels;
    const Tensor<float> batch = gather_batch(set, order, first, count, labels);
    const Tensor<float> logits = net.logits(batch);
    for (size_t i = 0; i < count; ++i)
      if (argmax_row(logits.data.data() + i * static_cast<size_t>(classes), classes) == labels[i])
        ++correct;
    Tape<float> tape;
    const double cost =
        tape.val(softmax_cross_entropy(tape, tape.input(logits), labels))[0];
    total_cost += cost * static_cast<double>(count);
  }
  EvalResult result;
  result.accuracy = static_cast<double>(correct) / static_cast<double>(set.images.size());
  result.mean_cost = total_cost / static_cast<double>(set.images.size());
  return result;
}

TrainOutput train(const TrainConfig& config, const FeatureSet& train_set,
                  const FeatureSet& val_set) {
  config.validate();
  if (train_set.images.empty() || val_set.images.empty())
    throw ConfigError("train and validation sets must be nonempty");
  if (train_set.height != config.model.input_height ||
      train_set.width != config.model.input_width)
    throw ConfigError("feature geometry " + std::to_string(train_set.height) + "x" +
                      std::to_string(train_set.width) + " does not match model input " +
                      std::to_string(config.model.input_height) + "x" +
                      std::to_string(config.model.input_width));
  if (val_set.height != train_set.height || val_set.width != train_set.width)
    throw ConfigError("validation feature geometry differs from training features");
  for (const FeatureImage& img : train_set.images)
    if (img.label < 0 || img.label >= config.model.num_classes)
      throw ConfigError("label " + std::to_string(img.label) + " outside the model's classes");

  Network<float> net(config.model);
  initialize_network(net, InitSpec{config.init, config.init_stddev, config.seed});

  const FeatureSet effective = apply_vat(train_set, config, net);
  const size_t n = effective.images.size();

  AdamState<float> adam;
  adam.lr = config.learning_rate;
  if (config.optimizer == OptimizerKind::Adam) {
    std::vector<size_t> sizes;
    for (const auto& p : net.params()) sizes.push_back(p.value.data.size());
    adam.init(sizes);
  }

  RunRecord record;
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Rng shuffle_rng(mix64(config.seed ^ mix64(0xE40C * static_cast<uint64_t>(epoch))));
    shuffle_rng.shuffle(order.begin(), order.end());
    double cost_sum = 0.0;
    size_t batch_index = 0;
    for (size_t first = 0; first < n; first += static_cast<size_t>(config.batch_size)) {
      const size_t count = std::min(static_cast<size_t>(config.batch_size), n - first);
      std::vector<int> labels;
      const Tensor<float> batch = gather_batch(effective, order, first, count, labels);
      Tape<float> tape;
      const auto fw = net.forward(
          tape, batch, /*training=*/true,
          mix64(config.seed ^ mix64(static_cast<uint64_t>(epoch) * 0x9E97 + batch_index)));
      const Var<float> loss = softmax_cross_entropy(tape, fw.logits, labels);
      tape.backward(loss);
      cost_sum += static_cast<double>(tape.val(loss)[0]) * static_cast<double>(count);

      if (config.optimizer == OptimizerKind::Sgd) {
        for (size_t p = 0; p < net.params().size(); ++p)
          sgd_step(net.params()[p].value.data, tape.grad(fw.param_vars[p]),
                   config.learning_rate);
      } else {
        std::vector<std::vector<float>*> params;
        std::vector<const std::vector<float>*> grads;
        for (size_t p = 0; p < net.params().size(); ++p) {
          params.push_back(&net.params()[p].value.data);
          grads.push_back(&tape.grad(fw.param_vars[p]));
        }
        adam_step(params, grads, adam);
      }
      ++batch_index;
    }
    EpochRow row;
    row.epoch = epoch;
    row.train_cost = cost_sum / static_cast<double>(n);
    row.train_accuracy = evaluate(net, effective).accuracy;
    row.validation_accuracy = evaluate(net, val_set).accuracy;
    record.rows.push_back(row);
    record.exit_epoch = epoch;
    if (config.cost_threshold && row.train_cost <= *config.cost_threshold) {
      record.exit_reason = ExitReason::Threshold;
      break;
    }
    record.exit_reason = ExitReason::MaxEpochs;
  }
  return {std::move(record), std::move(net), n};
}

void emit_metrics(const RunRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "epoch,train_cost,train_acc,val_acc\n";
  for (const EpochRow& r : record.rows)
    out << r.epoch << "," << format_double(r.train_cost) << ","
        << format_double(r.train_accuracy) << "," << format_double(r.validation_accuracy)
        << "\n";
  if (!out) throw IoError("write failed for " + path.string());
}

RunRecord parse_metrics(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "epoch,train_cost,train_acc,val_acc")
    throw FormatError(path.string() + ": bad metrics header");
  RunRecord record;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    EpochRow row;
    char* end = nullptr;
    row.epoch = static_cast<int>(std::strtol(line.c_str(), &end, 10));
    if (*end != ',') throw FormatError(path.string() + ": bad metrics row");
    row.train_cost = std::strtod(end + 1, &end);
    if (*end != ',') throw FormatError(path.string() + ": bad metrics row");
    row.train_accuracy = std::strtod(end + 1, &end);
    if (*end != ',') throw FormatError(path.string() + ": bad metrics row");
    row.validation_accuracy = std::strtod(end + 1, &end);
    record.rows.push_back(row);
  }
  record.exit_epoch = record.rows.empty() ? 0 : record.rows.back().epoch;
  return record;
}

void emit_run_summary(const RunRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "exit_epoch,exit_reason\n"
      << record.exit_epoch << "," << exit_reason_name(record.exit_reason) << "\n";
}

void emit_plot(const std::vector<std::pair<std::string, RunRecord>>& records, PlotMetric metric,
               const std::string& title, const std::filesystem::path& path, int epoch_limit) {
  PlotSpec plot;
  plot.title = title;
  plot.xlabel = "epoch";
  switch (metric) {
    case PlotMetric::ValidationAccuracy: plot.ylabel = "validation accuracy"; break;
    case PlotMetric::TrainAccuracy: plot.ylabel = "train accuracy"; break;
    case PlotMetric::TrainCost: plot.ylabel = "train cost"; break;
  }
  for (const auto& [name, record] : records) {
    PlotSeries series;
    series.name = name;
    for (const EpochRow& r : record.rows) {
      if (epoch_limit > 0 && r.epoch > epoch_limit) break;
      series.xs.push_back(r.epoch);
      switch (metric) {
        case PlotMetric::ValidationAccuracy: series.ys.push_back(r.validation_accuracy); break;
        case PlotMetric::TrainAccuracy: series.ys.push_back(r.train_accuracy); break;
        case PlotMetric::TrainCost: series.ys.push_back(r.train_cost); break;
      }
    }
    plot.series.push_back(std::move(series));
  }
  write_svg_plot(plot, path);
}

RawDataset load_raw_dataset(const DatasetManifest& manifest, const std::filesystem::path& root) {
  RawDataset data;
  data.noise = load_noise_sources(root);
  for (const ManifestEntry& e : manifest.examples) {
    RawExample ex;
    ex.label = e.label;
    if (is_silence_path(e.path)) {
      if (data.noise.empty())
        throw ParamError("manifest has silence entries but no background noise sources exist");
      Rng rng(fnv1a64(e.path));
      ex.clip = make_silence_clip(data.noise, rng, e.path);
    } else {
      ex.clip = load_wav(root / e.path);
      ex.clip.source_path = e.path;
    }
    (e.partition == Partition::Train ? data.train : data.validation).push_back(std::move(ex));
  }
  return data;
}

FeatureSet featurize_dataset(const std::vector<RawExample>& examples,
                             const SpectrogramConfig& config, double noise_ratio,
                             const std::vector<std::vector<float>>& noise) {
  if (noise_ratio < 0.0 || noise_ratio > 1.0)
    throw ParamError("noise_ratio must be in [0, 1]");
  const Featurizer featurizer(config);
  FeatureSet set;
  set.mode = config.mode;
  set.height = featurizer.output_height();
  set.width = featurizer.output_width();
  const uint64_t ratio_salt = std::bit_cast<uint64_t>(noise_ratio);
  for (const RawExample& ex : examples) {
    AudioClip clip = ex.clip;
    if (noise_ratio > 0.0 && !noise.empty() && !is_silence_path(clip.source_path)) {
      Rng rng(mix64(fnv1a64(clip.source_path) ^ mix64(ratio_salt)));
      clip = mix_noise(clip, noise_window(noise, rng, "noise"), noise_ratio);
    }
    FeatureImage img = featurizer.featurize(clip);
    img.label = ex.label;
    set.images.push_back(std::move(img));
  }
  return set;
}

void write_sweep_csv(const std::string& param, const SweepResult& result,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "param,value,seed,final_val_acc,exit_epoch,exit_reason\n";
  for (const SweepRow& r : result.rows)
    out << param << "," << r.value << "," << r.seed << "," << format_double(r.final_val_acc)
        << "," << r.exit_epoch << "," << exit_reason_name(r.exit_reason) << "\n";
}

SweepResult run_sweep(const SweepSpec& spec, const RawDataset& data,
                      const std::filesystem::path& out_dir) {
  if (spec.values.empty()) throw ConfigError("sweep needs at least one value");
  if (spec.repeats < 1) throw ConfigError("sweep repeats must be >= 1");
  const auto& known = sweepable_params();
  if (std::find(known.begin(), known.end(), spec.param) == known.end()) {
    std::string names;
    for (const auto& n : known) names += (names.empty() ? "" : ", ") + n;
    throw ConfigError("unknown sweep parameter '" + spec.param + "'; valid: " + names);
  }
  const bool featurizer_param = spec.param == "buckets" || spec.param == "window" ||
                                spec.param == "stride" || spec.param == "noise";

  std::filesystem::create_directories(out_dir);
  SweepResult result;

  FeatureSet shared_train, shared_val;
  if (!featurizer_param) {
    shared_train = featurize_dataset(data.train, spec.featurizer, 0.0, data.noise);
    shared_val = featurize_dataset(data.validation, spec.featurizer, 0.0, data.noise);
  }

  for (const std::string& value : spec.values) {
    const FeatureSet* train_features = &shared_train;
    const FeatureSet* val_features = &shared_val;
    FeatureSet local_train, local_val;
    TrainConfig config = spec.base;
    try {
      if (featurizer_param) {
        SpectrogramConfig fcfg = spec.featurizer;
        double noise_ratio = 0.0;
        if (spec.param == "buckets")
          fcfg.num_buckets = std::stoi(value);
        else if (spec.param == "window")
          fcfg.window_size = std::stoi(value);
        else if (spec.param == "stride")
          fcfg.window_stride = std::stoi(value);
        else
          noise_ratio = std::stod(value);
        local_train = featurize_dataset(data.train, fcfg, noise_ratio, data.noise);
        local_val = featurize_dataset(data.validation, fcfg, noise_ratio, data.noise);
        train_features = &local_train;
        val_features = &local_val;
      } else if (spec.param == "optimizer") {
        config.optimizer = value == "sgd" ? OptimizerKind::Sgd : OptimizerKind::Adam;
        if (value != "sgd" && value != "adam")
          throw ConfigError("optimizer value must be sgd or adam");
      } else if (spec.param == "init") {
        if (value == "xavier")
          config.init = InitKind::Xavier;
        else if (value == "trunc-normal")
          config.init = InitKind::TruncatedNormal;
        else
          throw ConfigError("init value must be xavier or trunc-normal");
      } else {
        config.vat = vat_mode_from_name(value);
      }
    } catch (const std::exception& e) {
      result.failures.push_back(value + ": " + e.what());
      continue;
    }
    config.model.input_height = train_features->height;
    config.model.input_width = train_features->width;
    for (int r = 0; r < spec.repeats; ++r) {
      config.seed = spec.base.seed + static_cast<uint64_t>(r);
      try {
        TrainOutput out = train(config, *train_features, *val_features);
        SweepRow row;
        row.value = value;
        row.seed = config.seed;
        row.final_val_acc = out.record.rows.back().validation_accuracy;
        row.exit_epoch = out.record.exit_epoch;
        row.exit_reason = out.record.exit_reason;
        result.rows.push_back(row);
        result.records.emplace_back(value + "/seed=" + std::to_string(config.seed),
                                    std::move(out.record));
      } catch (const std::exception& e) {
        result.failures.push_back(value + "/seed=" + std::to_string(config.seed) + ": " +
                                  e.what());
      }
    }
  }

  write_sweep_csv(spec.param, result, out_dir / ("sweep_" + spec.param + ".csv"));

  const bool numeric = featurizer_param;
  if (numeric) {
    PlotSpec plot;
    plot.title = "final validation accuracy vs " + spec.param;
    plot.xlabel = spec.param;
    plot.ylabel = "validation accuracy";
    PlotSeries points;
    points.name = "runs";
    points.points_only = true;
    PlotSeries means;
    means.name = "mean";
    for (const std::string& value : spec.values) {
      double sum = 0.0;
      int count = 0;
      for (const SweepRow& r : result.rows) {
        if (r.value != value) continue;
        points.xs.push_back(std::stod(value));
        points.ys.push_back(r.final_val_acc);
        sum += r.final_val_acc;
        ++count;
      }
      if (count > 0) {
        means.xs.push_back(std::stod(value));
        means.ys.push_back(sum / count);
      }
    }
    plot.series.push_back(std::move(means));
    plot.series.push_back(std::move(points));
    write_svg_plot(plot, out_dir / ("sweep_" + spec.param + ".svg"));
  } else {
    emit_plot(result.records, PlotMetric::ValidationAccuracy,
              "validation accuracy vs epoch by " + spec.param,
              out_dir / ("sweep_" + spec.param + ".svg"));
  }
  return result;
}

VatReport compare_vat(const TrainConfig& base, const FeatureSet& train_set,
                      const FeatureSet& val_set, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  struct RunDef {
    std::string name;
    VatMode vat;
    double keep_prob;
    bool equal_budget;
  };
  const double dropout_keep = base.model.keep_prob < 1.0 ? base.model.keep_prob : 0.5;
  const std::vector<RunDef> defs = {
      {"vanilla", VatMode::Off, 1.0, false},
      {"dropout", VatMode::Off, dropout_keep, false},
      {"vat", VatMode::Both, 1.0, false},
      {"vat-equal-budget", VatMode::Both, 1.0, true},
  };
  VatReport report;
  std::vector<std::pair<std::string, RunRecord>> records;
  for (const RunDef& def : defs) {
    TrainConfig config = base;
    config.vat = def.vat;
    config.vat_equal_budget = def.equal_budget;
    config.model.keep_prob = def.keep_prob;
    TrainOutput out = train(config, train_set, val_set);
    VatRunReport run;
    run.name = def.name;
    run.final_val_acc = out.record.rows.back().validation_accuracy;
    run.effective_train_size = out.effective_train_size;
    run.record = out.record;
    emit_metrics(out.record, out_dir / ("vat_" + def.name + ".csv"));
    records.emplace_back(def.name, std::move(out.record));
    report.runs.push_back(std::move(run));
  }

  std::ofstream summary(out_dir / "vat_summary.csv", std::ios::binary);
  summary << "run,final_val_acc,exit_epoch,exit_reason,effective_train_size\n";
  for (const VatRunReport& r : report.runs)
    summary << r.name << "," << format_double(r.final_val_acc) << "," << r.record.exit_epoch
            << "," << exit_reason_name(r.record.exit_reason) << "," << r.effective_train_size
            << "\n";

  emit_plot(records, PlotMetric::ValidationAccuracy, "validation accuracy vs epoch",
            out_dir / "vat_accuracy_full.svg");
  emit_plot(records, PlotMetric::ValidationAccuracy, "validation accuracy, first 10 epochs",
            out_dir / "vat_accuracy_first10.svg", 10);
  emit_plot(records, PlotMetric::TrainCost, "training cost vs epoch",
            out_dir / "vat_cost_full.svg");
  emit_plot(records, PlotMetric::TrainCost, "training cost, first 10 epochs",
            out_dir / "vat_cost_first10.svg", 10);
  return report;
}

}  // namespace kws
