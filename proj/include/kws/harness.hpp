#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kws/adversarial.hpp"
#include "kws/audio.hpp"
#include "kws/featurize.hpp"
#include "kws/models.hpp"
#include "kws/optim.hpp"

namespace kws {

enum class VatMode { Off, Sign, Fgsm, Std, Both };

std::string_view vat_mode_name(VatMode mode);
VatMode vat_mode_from_name(std::string_view name);

struct TrainConfig {
  ModelSpec model;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double learning_rate = 0.001;
  InitKind init = InitKind::Xavier;
  double init_stddev = 0.01;
  int batch_size = 64;
  int max_epochs = 10;
  std::optional<double> cost_threshold;  // mean epoch training cost triggering early exit
  VatMode vat = VatMode::Off;
  double sign_epsilon = 0.001;
  bool vat_equal_budget = false;  // sample |original| examples from the augmented set
  uint64_t seed = 0;

  void validate() const;
};

enum class ExitReason { Threshold, MaxEpochs };
std::string_view exit_reason_name(ExitReason r);

struct EpochRow {
  int epoch = 0;
  double train_cost = 0.0;
  double train_accuracy = 0.0;
  double validation_accuracy = 0.0;
};

struct RunRecord {
  std::vector<EpochRow> rows;  // contiguous, epoch 1..exit_epoch
  int exit_epoch = 0;
  ExitReason exit_reason = ExitReason::MaxEpochs;
};

struct EvalResult {
  double accuracy = 0.0;
  double mean_cost = 0.0;
};

struct TrainOutput {
  RunRecord record;
  Network<float> network;
  size_t effective_train_size = 0;  // after any adversarial augmentation
};

// One epoch = one full shuffled pass. Stops when the epoch's mean training
// cost reaches cost_threshold or at max_epochs. Fully determined by
// (config, data).
TrainOutput train(const TrainConfig& config, const FeatureSet& train_set,
                  const FeatureSet& val_set);

EvalResult evaluate(const Network<float>& net, const FeatureSet& set);

// CSV: epoch,train_cost,train_acc,val_acc
void emit_metrics(const RunRecord& record, const std::filesystem::path& path);
RunRecord parse_metrics(const std::filesystem::path& path);
// CSV: exit_epoch,exit_reason
void emit_run_summary(const RunRecord& record, const std::filesystem::path& path);

enum class PlotMetric { ValidationAccuracy, TrainAccuracy, TrainCost };
// One polyline per named record; epoch_limit > 0 restricts to the first n
// epochs (zoomed views).
void emit_plot(const std::vector<std::pair<std::string, RunRecord>>& records, PlotMetric metric,
               const std::string& title, const std::filesystem::path& path, int epoch_limit = 0);

struct RawExample {
  AudioClip clip;
  int label = kUnknownLabel;
};

struct RawDataset {
  std::vector<RawExample> train, validation;
  std::vector<std::vector<float>> noise;
};

// Loads manifest entries (synthesizing "_silence_/" rows from the noise
// sources) into memory.
RawDataset load_raw_dataset(const DatasetManifest& manifest, const std::filesystem::path& root);

// Featurizes clips, mixing a deterministic noise window (keyed on the source
// path) into each non-silence clip when noise_ratio > 0.
FeatureSet featurize_dataset(const std::vector<RawExample>& examples,
                             const SpectrogramConfig& config, double noise_ratio,
                             const std::vector<std::vector<float>>& noise);

inline const std::vector<std::string>& sweepable_params() {
  static const std::vector<std::string> names = {"buckets", "window",    "stride", "noise",
                                                 "optimizer", "init",    "vat"};
  return names;
}

struct SweepSpec {
  std::string param;
  std::vector<std::string> values;
  TrainConfig base;
  SpectrogramConfig featurizer;
  int repeats = 3;
};

struct SweepRow {
  std::string value;
  uint64_t seed = 0;
  double final_val_acc = 0.0;
  int exit_epoch = 0;
  ExitReason exit_reason = ExitReason::MaxEpochs;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<std::string> failures;  // "<value>/seed=<s>: <error>"
  std::vector<std::pair<std::string, RunRecord>> records;
};

// One train+evaluate per (value, seed). Sweeps over featurizer knobs
// refeaturize per value; trainer knobs share one featurization. Individual
// run failures are recorded, not fatal. Emits sweep_<param>.csv and
// sweep_<param>.svg under out_dir.
SweepResult run_sweep(const SweepSpec& spec, const RawDataset& data,
                      const std::filesystem::path& out_dir);

void write_sweep_csv(const std::string& param, const SweepResult& result,
                     const std::filesystem::path& path);

struct VatRunReport {
  std::string name;
  RunRecord record;
  double final_val_acc = 0.0;
  size_t effective_train_size = 0;
};

struct VatReport {
  std::vector<VatRunReport> runs;
};

// Controlled comparison on a shared seed: vanilla, dropout, adversarial
// augmentation, and the equal-sample-budget variant. Emits per-run metrics,
// a summary CSV, and zoomed/full accuracy+cost plots under out_dir.
VatReport compare_vat(const TrainConfig& base, const FeatureSet& train_set,
                      const FeatureSet& val_set, const std::filesystem::path& out_dir);

}  // namespace kws
