#include "kws/featurize.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "kws/error.hpp"
#include "kws/rng.hpp"

namespace kws {

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

template <typename T>
void write_raw(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_raw(std::ifstream& in, T& v, const std::string& what) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("feature cache truncated while reading " + what);
}

constexpr char kCacheMagic[4] = {'K', 'W', 'S', 'F'};
constexpr uint32_t kCacheVersion = 1;

}  // namespace

std::string_view feature_mode_name(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::Spectrogram: return "spectrogram";
    case FeatureMode::Mfcc: return "mfcc";
    case FeatureMode::AmplitudePlot: return "amplitude";
  }
  throw ParamError("bad feature mode");
}

FeatureMode feature_mode_from_name(std::string_view name) {
  if (name == "spectrogram") return FeatureMode::Spectrogram;
  if (name == "mfcc") return FeatureMode::Mfcc;
  if (name == "amplitude") return FeatureMode::AmplitudePlot;
  throw ParamError("unknown feature mode '" + std::string(name) + "'");
}

void SpectrogramConfig::validate() const {
  if (window_size < 2 || window_size > kClipSamples)
    throw ParamError("window_size must be in [2, 16000]");
  if (window_stride < 1) throw ParamError("window_stride must be positive");
  if (log_offset <= 0.0) throw ParamError("log_offset must be positive");
  if (num_buckets < 1) throw ParamError("num_buckets must be >= 1");
  if (num_buckets > window_size / 2 + 1)
    throw ParamError("num_buckets exceeds available frequency bins (window_size/2 + 1)");
  if (mode == FeatureMode::Mfcc && num_buckets > kNumMelFilters)
    throw ParamError("num_buckets exceeds the mel filter count in MFCC mode");
  if (output_height < -1 || output_width < -1)
    throw ParamError("output size must be -1 (default), 0 (native) or positive");
  if (mode == FeatureMode::AmplitudePlot && resolved_width() > kClipSamples)
    throw ParamError("amplitude plot width exceeds the sample count");
}

int SpectrogramConfig::frame_count() const {
  return (kClipSamples - window_size) / window_stride + 1;
}

int SpectrogramConfig::resolved_height() const {
  if (mode == FeatureMode::AmplitudePlot) return output_height > 0 ? output_height : 100;
  if (output_height == -1) return 28;
  if (output_height == 0) return num_buckets;
  return output_height;
}

int SpectrogramConfig::resolved_width() const {
  if (mode == FeatureMode::AmplitudePlot) return output_width > 0 ? output_width : 100;
  if (output_width == -1) return 28;
  if (output_width == 0) return frame_count();
  return output_width;
}

std::vector<std::vector<double>> frame_signal(const AudioClip& clip, int window_size,
                                              int window_stride) {
  if (window_size < 1 || window_size > kClipSamples)
    throw ParamError("window_size must be in [1, 16000]");
  if (window_stride < 1) throw ParamError("window_stride must be positive");
  const int n = static_cast<int>(clip.samples.size());
  const int count = (n - window_size) / window_stride + 1;
  std::vector<std::vector<double>> frames;
  frames.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    const int start = i * window_stride;
    std::vector<double> frame(static_cast<size_t>(window_size));
    for (int k = 0; k < window_size; ++k)
      frame[static_cast<size_t>(k)] = static_cast<double>(clip.samples[static_cast<size_t>(start + k)]);
    frames.push_back(std::move(frame));
  }
  return frames;
}

std::vector<double> hann_window(int n) {
  if (n < 2) throw ParamError("hann window needs n >= 2");
  std::vector<double> w(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k)
    w[static_cast<size_t>(k)] = 0.5 * (1.0 - std::cos(2.0 * kPi * k / (n - 1)));
  return w;
}

std::vector<double> dft_magnitude(const std::vector<double>& frame) {
  return DftPlan(static_cast<int>(frame.size())).magnitudes(frame);
}

std::vector<double> log_compress(std::vector<double> magnitudes, double log_offset) {
  for (double& m : magnitudes) m = std::log(m + log_offset);
  return magnitudes;
}

std::vector<double> bucketize_mean(const std::vector<double>& log_magnitudes, int num_buckets) {
  const int n = static_cast<int>(log_magnitudes.size());
  if (num_buckets < 1) throw ParamError("num_buckets must be >= 1");
  if (num_buckets > n) throw ParamError("num_buckets exceeds available bins");
  std::vector<double> out(static_cast<size_t>(num_buckets));
  for (int b = 0; b < num_buckets; ++b) {
    const int lo = static_cast<int>(static_cast<int64_t>(b) * n / num_buckets);
    const int hi = static_cast<int>(static_cast<int64_t>(b + 1) * n / num_buckets);
    double sum = 0.0;
    for (int k = lo; k < hi; ++k) sum += log_magnitudes[static_cast<size_t>(k)];
    out[static_cast<size_t>(b)] = sum / static_cast<double>(hi - lo);
  }
  return out;
}

MelFilterbank::MelFilterbank(int num_mel, int dft_size, double sample_rate)
    : num_mel_(num_mel), num_bins_(dft_size / 2 + 1) {
  if (num_mel < 1) throw ParamError("mel filter count must be >= 1");
  const double mel_max = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(static_cast<size_t>(num_mel) + 2);
  for (int m = 0; m < num_mel + 2; ++m)
    edges[static_cast<size_t>(m)] = mel_to_hz(mel_max * m / (num_mel + 1));
  filters_.resize(static_cast<size_t>(num_mel));
  for (int m = 1; m <= num_mel; ++m) {
    const double lo = edges[static_cast<size_t>(m - 1)];
    const double mid = edges[static_cast<size_t>(m)];
    const double hi = edges[static_cast<size_t>(m + 1)];
    auto& taps = filters_[static_cast<size_t>(m - 1)];
    double total = 0.0;
    for (int k = 0; k < num_bins_; ++k) {
      const double f = static_cast<double>(k) * sample_rate / dft_size;
      double w = 0.0;
      if (f > lo && f < mid)
        w = (f - lo) / (mid - lo);
      else if (f >= mid && f < hi)
        w = (hi - f) / (hi - mid);
      if (w > 0.0) {
        taps.emplace_back(k, w);
        total += w;
      }
    }
    for (auto& [bin, w] : taps) w /= total;
  }
}

std::vector<double> MelFilterbank::apply(const std::vector<double>& magnitudes) const {
  if (static_cast<int>(magnitudes.size()) != num_bins_)
    throw ParamError("magnitude vector does not match filterbank bin count");
  std::vector<double> out(static_cast<size_t>(num_mel_), 0.0);
  for (int m = 0; m < num_mel_; ++m) {
    double sum = 0.0;
    for (const auto& [bin, w] : filters_[static_cast<size_t>(m)])
      sum += w * magnitudes[static_cast<size_t>(bin)];
    out[static_cast<size_t>(m)] = sum;
  }
  return out;
}

std::vector<double> dct2(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  std::vector<double> out(static_cast<size_t>(n), 0.0);
  for (int k = 0; k < n; ++k) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
      sum += x[static_cast<size_t>(i)] * std::cos(kPi * (i + 0.5) * k / n);
    out[static_cast<size_t>(k)] = sum;
  }
  return out;
}

std::vector<double> bucketize_mfcc(const std::vector<double>& magnitudes, int num_buckets,
                                   const MelFilterbank& mel, double log_offset) {
  if (num_buckets < 1) throw ParamError("num_buckets must be >= 1");
  if (num_buckets > mel.num_mel()) throw ParamError("num_buckets exceeds the mel filter count");
  if (num_buckets > static_cast<int>(magnitudes.size()))
    throw ParamError("num_buckets exceeds available bins");
  const std::vector<double> coeffs = dct2(log_compress(mel.apply(magnitudes), log_offset));
  return {coeffs.begin(), coeffs.begin() + num_buckets};
}

std::vector<double> resample_area(const std::vector<double>& in, int in_h, int in_w, int out_h,
                                  int out_w) {
  if (in_h < 1 || in_w < 1 || out_h < 1 || out_w < 1)
    throw ParamError("resample dimensions must be positive");
  if (in.size() != static_cast<size_t>(in_h) * in_w)
    throw ParamError("resample input size mismatch");

  auto resample_rows = [](const std::vector<double>& src, int h, int w, int oh) {
    std::vector<double> dst(static_cast<size_t>(oh) * w, 0.0);
    const double span = static_cast<double>(h) / oh;
    for (int r = 0; r < oh; ++r) {
      const double a = r * span;
      const double b = (r + 1) * span;
      const int first = static_cast<int>(a);
      const int last = std::min(h - 1, static_cast<int>(std::ceil(b)) - 1);
      for (int i = first; i <= last; ++i) {
        const double overlap =
            std::min(b, static_cast<double>(i + 1)) - std::max(a, static_cast<double>(i));
        if (overlap <= 0.0) continue;
        for (int c = 0; c < w; ++c)
          dst[static_cast<size_t>(r) * w + c] += overlap * src[static_cast<size_t>(i) * w + c];
      }
      for (int c = 0; c < w; ++c) dst[static_cast<size_t>(r) * w + c] /= span;
    }
    return dst;
  };

  // rows, then columns via transpose / resample / transpose
  std::vector<double> tmp = resample_rows(in, in_h, in_w, out_h);
  std::vector<double> t(static_cast<size_t>(in_w) * out_h);
  for (int r = 0; r < out_h; ++r)
    for (int c = 0; c < in_w; ++c)
      t[static_cast<size_t>(c) * out_h + r] = tmp[static_cast<size_t>(r) * in_w + c];
  std::vector<double> t2 = resample_rows(t, in_w, out_h, out_w);
  std::vector<double> out(static_cast<size_t>(out_h) * out_w);
  for (int c = 0; c < out_w; ++c)
    for (int r = 0; r < out_h; ++r)
      out[static_cast<size_t>(r) * out_w + c] = t2[static_cast<size_t>(c) * out_h + r];
  return out;
}

FeatureImage assemble_image(const std::vector<std::vector<double>>& frame_features, int out_h,
                            int out_w) {
  if (frame_features.empty()) throw ParamError("assemble_image needs at least one frame");
  const int frames = static_cast<int>(frame_features.size());
  const int buckets = static_cast<int>(frame_features[0].size());
  std::vector<double> m(static_cast<size_t>(buckets) * frames);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < frames; ++c) {
    if (static_cast<int>(frame_features[static_cast<size_t>(c)].size()) != buckets)
      throw ParamError("ragged frame feature vectors");
    for (int r = 0; r < buckets; ++r) {
      const double v = frame_features[static_cast<size_t>(c)][static_cast<size_t>(r)];
      m[static_cast<size_t>(r) * frames + c] = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi > lo) {
    const double scale = 1.0 / (hi - lo);
    for (double& v : m) v = (v - lo) * scale;
  } else {
    std::fill(m.begin(), m.end(), 0.5);  // degenerate image
  }
  const std::vector<double> resampled = resample_area(m, buckets, frames, out_h, out_w);
  FeatureImage img;
  img.height = out_h;
  img.width = out_w;
  img.pixels.resize(resampled.size());
  for (size_t i = 0; i < resampled.size(); ++i)
    img.pixels[i] = static_cast<float>(std::clamp(resampled[i], 0.0, 1.0));
  return img;
}

FeatureImage amplitude_plot(const AudioClip& clip, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) throw ParamError("plot size must be positive");
  const int n = static_cast<int>(clip.samples.size());
  if (out_w > n) throw ParamError("amplitude plot width exceeds the sample count");
  FeatureImage img;
  img.height = out_h;
  img.width = out_w;
  img.mode = FeatureMode::AmplitudePlot;
  img.pixels.assign(static_cast<size_t>(out_h) * out_w, 0.0f);

  const auto row_of = [out_h](float v) {
    const double y = (1.0 - static_cast<double>(v)) * 0.5 * (out_h - 1);
    return std::clamp(static_cast<int>(std::lround(y)), 0, out_h - 1);
  };

  std::vector<int> lo(static_cast<size_t>(out_w), out_h);
  std::vector<int> hi(static_cast<size_t>(out_w), -1);
  int prev_row = row_of(clip.samples[0]);
  int prev_col = 0;
  for (int i = 0; i < n; ++i) {
    const int col = static_cast<int>(static_cast<int64_t>(i) * out_w / n);
    const int row = row_of(clip.samples[static_cast<size_t>(i)]);
    auto& l = lo[static_cast<size_t>(col)];
    auto& h = hi[static_cast<size_t>(col)];
    l = std::min(l, row);
    h = std::max(h, row);
    if (col != prev_col) {  // bridge the column boundary through the last sample
      l = std::min(l, prev_row);
      h = std::max(h, prev_row);
    }
    prev_row = row;
    prev_col = col;
  }
  for (int c = 0; c < out_w; ++c)
    for (int r = lo[static_cast<size_t>(c)]; r <= hi[static_cast<size_t>(c)]; ++r)
      img.at(r, c) = 1.0f;
  return img;
}

Featurizer::Featurizer(SpectrogramConfig config) : config_(config) {
  config_.validate();
  out_h_ = config_.resolved_height();
  out_w_ = config_.resolved_width();
  if (config_.mode != FeatureMode::AmplitudePlot) {
    window_ = hann_window(config_.window_size);
    plan_ = DftPlan(config_.window_size);
    if (config_.mode == FeatureMode::Mfcc)
      mel_ = MelFilterbank(kNumMelFilters, config_.window_size, kSampleRate);
  }
}

FeatureImage Featurizer::featurize(const AudioClip& clip) const {
  if (config_.mode == FeatureMode::AmplitudePlot) {
    FeatureImage img = amplitude_plot(clip, out_h_, out_w_);
    return img;
  }
  const std::vector<std::vector<double>> frames =
      frame_signal(clip, config_.window_size, config_.window_stride);
  std::vector<std::vector<double>> features;
  features.reserve(frames.size());
  std::vector<double> windowed(static_cast<size_t>(config_.window_size));
  for (const std::vector<double>& frame : frames) {
    for (size_t k = 0; k < windowed.size(); ++k) windowed[k] = frame[k] * window_[k];
    const std::vector<double> mags = plan_.magnitudes(windowed);
    if (config_.mode == FeatureMode::Spectrogram)
      features.push_back(
          bucketize_mean(log_compress(mags, config_.log_offset), config_.num_buckets));
    else
      features.push_back(bucketize_mfcc(mags, config_.num_buckets, mel_, config_.log_offset));
  }
  FeatureImage img = assemble_image(features, out_h_, out_w_);
  img.mode = config_.mode;
  return img;
}

void write_feature_cache(const FeatureSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kCacheMagic, 4);
  write_raw(out, kCacheVersion);
  write_raw(out, static_cast<uint8_t>(set.mode));
  write_raw(out, static_cast<uint32_t>(set.height));
  write_raw(out, static_cast<uint32_t>(set.width));
  write_raw(out, static_cast<uint32_t>(set.images.size()));
  const size_t pixel_count = static_cast<size_t>(set.height) * set.width;
  for (const FeatureImage& img : set.images) {
    if (img.height != set.height || img.width != set.width || img.pixels.size() != pixel_count)
      throw ParamError("feature cache images must share the set geometry");
    write_raw(out, static_cast<int32_t>(img.label));
    write_raw(out, img.provenance);
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(pixel_count * sizeof(float)));
  }
  if (!out) throw IoError("write failed for " + path.string());
}

FeatureSet read_feature_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCacheMagic, 4) != 0)
    throw FormatError(path.string() + ": not a feature cache");
  uint32_t version = 0;
  read_raw(in, version, "version");
  if (version != kCacheVersion)
    throw FormatError(path.string() + ": unsupported cache version " + std::to_string(version));
  uint8_t mode = 0;
  uint32_t height = 0, width = 0, count = 0;
  read_raw(in, mode, "mode");
  read_raw(in, height, "height");
  read_raw(in, width, "width");
  read_raw(in, count, "count");
  if (mode > 2) throw FormatError(path.string() + ": bad feature mode byte");
  if (height == 0 || width == 0 || height > 1 << 16 || width > 1 << 16)
    throw FormatError(path.string() + ": implausible image geometry");
  FeatureSet set;
  set.mode = static_cast<FeatureMode>(mode);
  set.height = static_cast<int>(height);
  set.width = static_cast<int>(width);
  set.images.reserve(count);
  const size_t pixel_count = static_cast<size_t>(height) * width;
  for (uint32_t i = 0; i < count; ++i) {
    FeatureImage img;
    img.height = set.height;
    img.width = set.width;
    img.mode = set.mode;
    int32_t label = 0;
    read_raw(in, label, "label");
    read_raw(in, img.provenance, "provenance");
    img.label = label;
    img.pixels.resize(pixel_count);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(pixel_count * sizeof(float)));
    if (!in) throw FormatError(path.string() + ": truncated pixel data");
    set.images.push_back(std::move(img));
  }
  return set;
}

void write_pgm(const FeatureImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  for (const float v : image.pixels) {
    const auto byte = static_cast<uint8_t>(
        std::clamp<long>(std::lround(255.0 * static_cast<double>(v)), 0, 255));
    out.put(static_cast<char>(byte));
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace kws
