// Acceptance suite: runs every shipping criterion end to end on a synthetic
// desk-scale corpus and prints one [PASS]/[FAIL] line per criterion.
//
//   acceptance            runs all criteria
//   acceptance --criterion N   runs one
//   acceptance --list     lists ids
//
// The corpus lives under <tmp>/kws_acceptance and is regenerated whenever
// the generation recipe changes (kCorpusTag).

#include <chrono>
#include <cmath>
#include <cstring>
#include <map>
#include <functional>
#include <iostream>
#include <numeric>

#include "../gradcheck_cases.hpp"
#include "../testutil.hpp"
#include "kws/harness.hpp"

using namespace kws;
namespace fs = std::filesystem;

#ifndef KWS_CLI_PATH
#define KWS_CLI_PATH ""
#endif

namespace {

constexpr const char* kCorpusTag = "acceptance-corpus-v1";
constexpr uint64_t kSeeds[3] = {1, 2, 3};

struct CriterionResult {
  bool pass = false;
  std::string detail;
};

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (const double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::string fmt(double v, const char* f = "%.4f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

// Shared corpus + cached featurizations, built once per process and reused
// across processes through the scratch directory.
class Context {
 public:
  Context() : root_(fs::temp_directory_path() / "kws_acceptance") {
    const fs::path marker = root_ / "corpus.tag";
    bool fresh = true;
    if (fs::exists(marker)) {
      std::ifstream in(marker);
      std::string tag;
      std::getline(in, tag);
      fresh = tag != kCorpusTag;
    }
    if (fresh) {
      fs::remove_all(root_);
      fs::create_directories(root_);
      test::CorpusSpec spec;
      spec.examples_per_word = 40;
      spec.seed = 20260809;
      test::write_corpus(root_ / "data", spec);
      // separate two-word corpus for the memorization smoke test
      test::CorpusSpec tiny;
      tiny.words = {"yes", "no"};
      tiny.examples_per_word = 25;
      tiny.seed = 555;
      test::write_corpus(root_ / "tiny", tiny);
      write_manifest(build_manifest(root_ / "data", 0.8, 11, 0.1), root_ / "manifest.tsv");
      write_manifest(build_manifest(root_ / "tiny", 1.0, 11, 0.0), root_ / "tiny_manifest.tsv");
      std::ofstream(marker) << kCorpusTag << "\n";
    }
  }

  const fs::path& root() const { return root_; }

  const RawDataset& data() {
    if (!data_) {
      data_ = std::make_unique<RawDataset>(
          load_raw_dataset(read_manifest(root_ / "manifest.tsv"), root_ / "data"));
    }
    return *data_;
  }

  const RawDataset& tiny_data() {
    if (!tiny_data_) {
      tiny_data_ = std::make_unique<RawDataset>(
          load_raw_dataset(read_manifest(root_ / "tiny_manifest.tsv"), root_ / "tiny"));
    }
    return *tiny_data_;
  }

  // Featurization cached on disk under a config nickname.
  std::pair<FeatureSet, FeatureSet> features(const std::string& name,
                                             const SpectrogramConfig& cfg) {
    const fs::path train_path = root_ / (name + "_train.feat");
    const fs::path val_path = root_ / (name + "_val.feat");
    if (fs::exists(train_path) && fs::exists(val_path))
      return {read_feature_cache(train_path), read_feature_cache(val_path)};
    const RawDataset& d = data();
    FeatureSet train_set = featurize_dataset(d.train, cfg, 0.0, d.noise);
    FeatureSet val_set = featurize_dataset(d.validation, cfg, 0.0, d.noise);
    write_feature_cache(train_set, train_path);
    write_feature_cache(val_set, val_path);
    return {std::move(train_set), std::move(val_set)};
  }

  SpectrogramConfig mfcc_native() const {
    SpectrogramConfig cfg;
    cfg.mode = FeatureMode::Mfcc;
    cfg.output_height = 0;
    cfg.output_width = 0;
    return cfg;
  }
  SpectrogramConfig mfcc_28() const {
    SpectrogramConfig cfg;
    cfg.mode = FeatureMode::Mfcc;
    return cfg;
  }
  SpectrogramConfig amplitude_100() const {
    SpectrogramConfig cfg;
    cfg.mode = FeatureMode::AmplitudePlot;
    return cfg;
  }

 private:
  fs::path root_;
  std::unique_ptr<RawDataset> data_, tiny_data_;
};

TrainConfig low_latency_config(const FeatureSet& features, uint64_t seed) {
  TrainConfig cfg;
  cfg.model = low_latency_spec(features.height, features.width);
  cfg.optimizer = OptimizerKind::Adam;
  cfg.learning_rate = 0.001;
  cfg.batch_size = 64;
  cfg.seed = seed;
  return cfg;
}

TrainConfig small_crm_config(const FeatureSet& features, uint64_t seed) {
  TrainConfig cfg;
  cfg.model = shallow_crm_spec(features.height, features.width, {8, 16, 32});
  cfg.model.crm_dense = 64;
  cfg.optimizer = OptimizerKind::Adam;
  cfg.learning_rate = 0.002;
  cfg.batch_size = 32;
  cfg.max_epochs = 20;
  cfg.seed = seed;
  return cfg;
}

// ----- criteria -----

CriterionResult c1_gradient_oracle(Context&) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(2026);
  double worst = 0.0;
  std::string worst_name;
  for (const auto& c : test::gradient_cases()) {
    for (int i = 0; i < 20; ++i) {
      const double err = c.run(rng);
      if (err > worst) {
        worst = err;
        worst_name = c.name;
      }
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool pass = worst < 1e-4 && secs < 60.0;
  return {pass, "max rel err " + fmt(worst, "%.2e") + " (" + worst_name + "), 20 cases per " +
                    "primitive, " + fmt(secs, "%.1f") + "s"};
}

CriterionResult c2_parameter_counts(Context&) {
  const long long mnist = count_params(mnist_cnn_spec());
  Network<float> mnist_net(mnist_cnn_spec());
  const ModelSpec ll_spec = low_latency_spec(40, 98);
  const long long ll = count_params(ll_spec);
  Network<float> ll_net(ll_spec);
  const bool pass = mnist == 3276684 && mnist_net.parameter_count() == 3276684 && ll == 63916 &&
                    ll_net.parameter_count() == 63916;
  return {pass, "mnist " + std::to_string(mnist) + " (want 3276684); low-latency 40x98 " +
                    std::to_string(ll) + " = " + fmt(ll / 63800.0, "%.4f") +
                    "x of the 63.8k reference"};
}

CriterionResult c3_init_properties(Context&) {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;

  const auto xav = xavier_init<double>({100, 1000}, 77);
  const double bound = xavier_bound({100, 1000});
  for (const double v : xav.data)
    if (std::abs(v) > bound) pass = false;
  if (xavier_init<double>({100, 1000}, 77).data != xav.data) pass = false;

  const auto tn = truncated_normal_init<double>({100, 1000}, 0.01, 78);
  for (const double v : tn.data)
    if (std::abs(v) > 0.02) pass = false;
  if (truncated_normal_init<double>({100, 1000}, 0.01, 78).data != tn.data) pass = false;

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= 10.0) pass = false;
  detail = "1e5 draws: xavier within +-" + fmt(bound, "%.6f") +
           ", trunc-normal within +-0.02, deterministic, " + fmt(secs, "%.2f") + "s";
  return {pass, detail};
}

CriterionResult c4_dsp_oracles(Context&) {
  bool pass = true;
  // Parseval on 100 random Hann-windowed frames
  Rng rng(99);
  const auto hann = hann_window(480);
  const DftPlan plan(480);
  double worst_rel = 0.0;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> frame(480);
    for (size_t i = 0; i < frame.size(); ++i) frame[i] = rng.uniform(-1.0, 1.0) * hann[i];
    const auto spectrum = plan.transform(frame);
    double lhs = 0.0;
    for (const auto& z : spectrum) lhs += std::norm(z);
    double rhs = 0.0;
    for (const double v : frame) rhs += v * v;
    rhs *= 480.0;
    worst_rel = std::max(worst_rel, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }
  if (worst_rel > 1e-6) pass = false;

  // on-bin tone localization
  for (const int bin : {4, 8, 16}) {
    std::vector<double> frame(480);
    for (int k = 0; k < 480; ++k) frame[static_cast<size_t>(k)] =
        std::cos(2.0 * kPi * bin * k / 480.0);
    const auto mags = dft_magnitude(frame);
    const auto arg = std::max_element(mags.begin(), mags.end()) - mags.begin();
    if (arg != bin) pass = false;
    const auto pooled = bucketize_mean(log_compress(mags, 1e-6), 40);
    const auto bucket = std::max_element(pooled.begin(), pooled.end()) - pooled.begin();
    if (bucket != static_cast<long>(static_cast<int64_t>(bin) * 40 / 241)) pass = false;
  }

  // framing count
  AudioClip clip = clip_from_samples(std::vector<float>(16000, 0.1f), "c4");
  const size_t frames = frame_signal(clip, 480, 160).size();
  if (frames != 98) pass = false;

  return {pass, "parseval worst rel " + fmt(worst_rel, "%.2e") +
                    "; tone argmax exact at bins 4/8/16; 30ms/10ms framing -> " +
                    std::to_string(frames) + " frames"};
}

CriterionResult c5_overfit_smoke(Context& ctx) {
  const auto start = std::chrono::steady_clock::now();
  const RawDataset& tiny = ctx.tiny_data();
  SpectrogramConfig cfg = ctx.mfcc_28();
  const FeatureSet train_set = featurize_dataset(tiny.train, cfg, 0.0, tiny.noise);

  TrainConfig tc;
  tc.model = mnist_cnn_spec();
  tc.optimizer = OptimizerKind::Adam;
  tc.learning_rate = 0.001;
  tc.batch_size = 64;  // 50 examples fit in one batch
  tc.max_epochs = 200;
  tc.cost_threshold = 0.05;
  tc.seed = 1;
  const TrainOutput out = train(tc, train_set, train_set);
  const double acc = out.record.rows.back().train_accuracy;

  // the train-accuracy tail must be non-decreasing within 0.05
  bool tail_ok = true;
  const size_t n_rows = out.record.rows.size();
  for (size_t i = n_rows > 10 ? n_rows - 10 : 0; i + 1 < n_rows; ++i)
    if (out.record.rows[i + 1].train_accuracy < out.record.rows[i].train_accuracy - 0.05)
      tail_ok = false;

  // the saved checkpoint must score the same through `kws eval`
  bool eval_ok = false;
  std::string eval_note = "cli eval skipped";
  if (std::strlen(KWS_CLI_PATH) != 0) {
    const fs::path ckpt = ctx.root() / "overfit.ckpt";
    const fs::path feat = ctx.root() / "overfit_train.feat";
    const fs::path log = ctx.root() / "overfit_eval.txt";
    save_checkpoint(out.network, ckpt, tc.seed, out.record.exit_epoch);
    write_feature_cache(train_set, feat);
    const std::string cmd = std::string(KWS_CLI_PATH) + " eval --checkpoint " + ckpt.string() +
                            " --features " + feat.string() + " > " + log.string() + " 2>&1";
    if (std::system(cmd.c_str()) == 0) {
      std::ifstream in(log);
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      const size_t pos = text.find("accuracy ");
      if (pos != std::string::npos) {
        const double cli_acc = std::strtod(text.c_str() + pos + 9, nullptr);
        eval_ok = cli_acc >= 0.95;
        eval_note = "cli eval accuracy " + fmt(cli_acc);
      }
    }
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool pass = train_set.images.size() == 50 && acc >= 0.95 &&
                    out.record.exit_epoch <= 200 && tail_ok && eval_ok && secs < 300.0;
  return {pass, "50 examples, train acc " + fmt(acc) + " at epoch " +
                    std::to_string(out.record.exit_epoch) + ", tail monotone within 0.05: " +
                    (tail_ok ? "yes" : "NO") + ", " + eval_note + ", " + fmt(secs, "%.1f") +
                    "s"};
}

CriterionResult c6_optimizer_comparison(Context& ctx) {
  const auto start = std::chrono::steady_clock::now();
  const auto [train_set, val_set] = ctx.features("mfcc_native", ctx.mfcc_native());
  int adam_wins = 0;
  std::string exits;
  for (const uint64_t seed : kSeeds) {
    TrainConfig cfg = low_latency_config(train_set, seed);
    cfg.max_epochs = 120;
    cfg.cost_threshold = 0.8;
    cfg.optimizer = OptimizerKind::Adam;
    cfg.learning_rate = 0.001;
    const TrainOutput adam = train(cfg, train_set, val_set);
    cfg.optimizer = OptimizerKind::Sgd;
    cfg.learning_rate = 0.01;
    const TrainOutput sgd = train(cfg, train_set, val_set);
    if (adam.record.exit_epoch < sgd.record.exit_epoch) ++adam_wins;
    exits += " s" + std::to_string(seed) + ":" + std::to_string(adam.record.exit_epoch) + "<" +
             std::to_string(sgd.record.exit_epoch);
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool pass = adam_wins >= 2 && secs < 1800.0;
  return {pass, "adam reached cost 0.8 first in " + std::to_string(adam_wins) +
                    "/3 seeds (adam<sgd exit epochs:" + exits + "), " + fmt(secs, "%.0f") + "s"};
}

CriterionResult c7_init_comparison(Context& ctx) {
  const auto [train_set, val_set] = ctx.features("mfcc_native", ctx.mfcc_native());
  int xavier_wins = 0;
  std::string exits;
  for (const uint64_t seed : kSeeds) {
    TrainConfig cfg = low_latency_config(train_set, seed);
    cfg.max_epochs = 120;
    cfg.cost_threshold = 0.8;
    cfg.init = InitKind::Xavier;
    const TrainOutput xav = train(cfg, train_set, val_set);
    cfg.init = InitKind::TruncatedNormal;
    cfg.init_stddev = 0.01;
    const TrainOutput tn = train(cfg, train_set, val_set);
    if (xav.record.exit_epoch < tn.record.exit_epoch) ++xavier_wins;
    exits += " s" + std::to_string(seed) + ":" + std::to_string(xav.record.exit_epoch) + "<" +
             std::to_string(tn.record.exit_epoch);
  }
  const bool pass = xavier_wins >= 2;
  return {pass, "xavier reached cost 0.8 first in " + std::to_string(xavier_wins) +
                    "/3 seeds (xavier<trunc exit epochs:" + exits + ")"};
}

CriterionResult c8_feature_format(Context& ctx) {
  const auto [spec_train, spec_val] = ctx.features("mfcc_28", ctx.mfcc_28());
  const auto [amp_train, amp_val] = ctx.features("amp_100", ctx.amplitude_100());
  std::vector<double> spec_acc, amp_acc;
  for (const uint64_t seed : kSeeds) {
    TrainConfig spec_cfg = low_latency_config(spec_train, seed);
    spec_cfg.max_epochs = 40;
    spec_acc.push_back(
        train(spec_cfg, spec_train, spec_val).record.rows.back().validation_accuracy);
    TrainConfig amp_cfg = low_latency_config(amp_train, seed);
    amp_cfg.max_epochs = 40;
    amp_acc.push_back(
        train(amp_cfg, amp_train, amp_val).record.rows.back().validation_accuracy);
  }
  const double spec_mean = mean_of(spec_acc);
  const double amp_mean = mean_of(amp_acc);
  return {spec_mean > amp_mean, "3-seed mean val acc: spectral-mode " + fmt(spec_mean) +
                                    " vs amplitude-plot " + fmt(amp_mean)};
}

CriterionResult c9_bucket_trend(Context& ctx) {
  SweepSpec sweep;
  sweep.param = "buckets";
  sweep.values = {"10", "20", "30", "40"};
  sweep.repeats = 3;
  sweep.featurizer = ctx.mfcc_native();
  sweep.base = low_latency_config(FeatureSet{FeatureMode::Mfcc, 40, 98, {}}, kSeeds[0]);
  sweep.base.max_epochs = 25;
  const SweepResult result = run_sweep(sweep, ctx.data(), ctx.root() / "sweep_buckets");
  if (result.rows.size() != 12 || !result.failures.empty())
    return {false, "expected 12 clean runs, got " + std::to_string(result.rows.size()) + " (" +
                       std::to_string(result.failures.size()) + " failures)"};
  std::map<std::string, std::vector<double>> by_value;
  for (const SweepRow& r : result.rows) by_value[r.value].push_back(r.final_val_acc);
  double best_mean = -1.0;
  std::string best_value;
  std::string means;
  for (const std::string& v : sweep.values) {
    const double m = mean_of(by_value[v]);
    means += " " + v + ":" + fmt(m);
    if (m > best_mean) {
      best_mean = m;
      best_value = v;
    }
  }
  const double noise = sample_std(by_value[best_value]);
  const double at40 = mean_of(by_value["40"]);
  const bool pass = at40 <= best_mean + noise;
  return {pass, "mean val acc by bucket count:" + means + "; best " + best_value + " (" +
                    fmt(best_mean) + " +- " + fmt(noise) + "), 40 -> " + fmt(at40) +
                    "; plot emitted"};
}

CriterionResult c10_noise_robustness(Context& ctx) {
  SweepSpec sweep;
  sweep.param = "noise";
  sweep.values = {"0", "0.1", "0.25", "0.5"};
  sweep.repeats = 3;
  sweep.featurizer = ctx.mfcc_native();
  sweep.base = low_latency_config(FeatureSet{FeatureMode::Mfcc, 40, 98, {}}, kSeeds[0]);
  sweep.base.max_epochs = 25;
  const SweepResult result = run_sweep(sweep, ctx.data(), ctx.root() / "sweep_noise");
  if (result.rows.size() != 12 || !result.failures.empty())
    return {false, "expected 12 clean runs, got " + std::to_string(result.rows.size())};
  std::map<std::string, std::vector<double>> by_value;
  for (const SweepRow& r : result.rows) by_value[r.value].push_back(r.final_val_acc);
  const double clean = mean_of(by_value["0"]);
  const double noisy = mean_of(by_value["0.5"]);
  std::string means;
  for (const std::string& v : sweep.values) means += " " + v + ":" + fmt(mean_of(by_value[v]));
  const bool pass = clean - noisy <= 0.15;
  return {pass, "mean val acc by noise ratio:" + means + "; drop at 0.5 = " +
                    fmt(clean - noisy) + " (bound 0.15)"};
}

CriterionResult c11_vat_suite(Context& ctx) {
  const auto [train_set, val_set] = ctx.features("mfcc_28", ctx.mfcc_28());

  // augmentation triples the set exactly
  const FeatureSet augmented = augment_dataset(train_set, AugmentConfig{});
  if (augmented.images.size() != 3 * train_set.images.size())
    return {false, "augmentation did not triple the train set"};

  std::vector<double> vat_acc, dropout_acc;
  std::string exits;
  for (const uint64_t seed : kSeeds) {
    TrainConfig vat_cfg = small_crm_config(train_set, seed);
    vat_cfg.vat = VatMode::Both;
    const TrainOutput vat = train(vat_cfg, train_set, val_set);
    if (vat.effective_train_size != 3 * train_set.images.size())
      return {false, "vat training did not see a tripled effective set"};

    TrainConfig drop_cfg = small_crm_config(train_set, seed);
    drop_cfg.model.keep_prob = 0.5;
    const TrainOutput dropped = train(drop_cfg, train_set, val_set);

    vat_acc.push_back(vat.record.rows.back().validation_accuracy);
    dropout_acc.push_back(dropped.record.rows.back().validation_accuracy);
    exits += " s" + std::to_string(seed) + ":vat@" + std::to_string(vat.record.exit_epoch) +
             "/drop@" + std::to_string(dropped.record.exit_epoch);
  }
  const double vat_mean = mean_of(vat_acc);
  const double drop_mean = mean_of(dropout_acc);
  const bool pass = vat_mean >= drop_mean;
  return {pass, "3x augmentation exact; 3-seed mean val acc vat " + fmt(vat_mean) +
                    " >= dropout " + fmt(drop_mean) + "; exit epochs" + exits};
}

CriterionResult c12_determinism(Context& ctx) {
  if (std::strlen(KWS_CLI_PATH) == 0) return {false, "cli path not configured"};
  // make sure the cached native features exist for the cli run
  ctx.features("mfcc_native", ctx.mfcc_native());
  const fs::path feat_dir = ctx.root() / "cli_feat";
  fs::create_directories(feat_dir);
  fs::copy_file(ctx.root() / "mfcc_native_train.feat", feat_dir / "train.feat",
                fs::copy_options::overwrite_existing);
  fs::copy_file(ctx.root() / "mfcc_native_val.feat", feat_dir / "val.feat",
                fs::copy_options::overwrite_existing);
  const std::string base = std::string(KWS_CLI_PATH) + " train --features " +
                           feat_dir.string() +
                           " --model low-latency --epochs 3 --batch-size 64 --seed 9"
                           " --out-dir ";
  const fs::path out1 = ctx.root() / "det1";
  const fs::path out2 = ctx.root() / "det2";
  const std::string log = " > /dev/null 2>&1";
  if (std::system((base + out1.string() + log).c_str()) != 0)
    return {false, "first cli train run failed"};
  if (std::system((base + out2.string() + log).c_str()) != 0)
    return {false, "second cli train run failed"};
  const auto a = test::read_bytes(out1 / "metrics.csv");
  const auto b = test::read_bytes(out2 / "metrics.csv");
  const bool pass = !a.empty() && a == b;
  return {pass, "repeated `kws train` runs produced " +
                    std::string(pass ? "byte-identical" : "DIFFERENT") + " metrics.csv (" +
                    std::to_string(a.size()) + " bytes)"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<CriterionResult(Context&)> fn;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {1, "gradient oracle", c1_gradient_oracle},
      {2, "parameter-count oracle", c2_parameter_counts},
      {3, "initialization properties", c3_init_properties},
      {4, "dsp oracles", c4_dsp_oracles},
      {5, "overfit smoke test", c5_overfit_smoke},
      {6, "optimizer comparison", c6_optimizer_comparison},
      {7, "initialization comparison", c7_init_comparison},
      {8, "feature-format comparison", c8_feature_format},
      {9, "bucket-count trend", c9_bucket_trend},
      {10, "noise robustness", c10_noise_robustness},
      {11, "adversarial augmentation suite", c11_vat_suite},
      {12, "determinism", c12_determinism},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--list") == 0) {
      for (const Criterion& c : criteria()) std::printf("C%d %s\n", c.id, c.name);
      return 0;
    }
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
  }

  Context ctx;
  int failures = 0;
  for (const Criterion& c : criteria()) {
    if (only != 0 && c.id != only) continue;
    CriterionResult result;
    const auto start = std::chrono::steady_clock::now();
    try {
      result = c.fn(ctx);
    } catch (const std::exception& e) {
      result = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] C%-2d %s: %s [%.1fs]\n", result.pass ? "PASS" : "FAIL", c.id, c.name,
                result.detail.c_str(), secs);
    std::fflush(stdout);
    if (!result.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
