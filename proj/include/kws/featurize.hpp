#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kws/audio.hpp"
#include "kws/fft.hpp"

namespace kws {

enum class FeatureMode : uint8_t { Spectrogram = 0, Mfcc = 1, AmplitudePlot = 2 };

std::string_view feature_mode_name(FeatureMode mode);
FeatureMode feature_mode_from_name(std::string_view name);

struct SpectrogramConfig {
  int window_size = 480;    // 30 ms at 16 kHz
  int window_stride = 160;  // 10 ms
  int num_buckets = 40;     // pooled frequency bands / kept DCT coefficients
  double log_offset = 1e-6;
  FeatureMode mode = FeatureMode::Mfcc;
  // -1: per-mode default (28x28 spectral, 100x100 amplitude); 0: native
  // buckets x frames geometry (spectral modes only).
  int output_height = -1;
  int output_width = -1;

  void validate() const;
  int frame_count() const;  // frames per one-second clip
  int resolved_height() const;
  int resolved_width() const;
};

// 2-D grayscale feature array with every pixel in [0, 1].
struct FeatureImage {
  int height = 0;
  int width = 0;
  FeatureMode mode = FeatureMode::Spectrogram;
  int label = -1;
  uint8_t provenance = 0;  // 0 original, 1 sign-perturbed, 2 std-perturbed
  std::vector<float> pixels;  // row-major

  float at(int r, int c) const { return pixels[static_cast<size_t>(r) * width + c]; }
  float& at(int r, int c) { return pixels[static_cast<size_t>(r) * width + c]; }
};

// Frames start at i * window_stride; count = floor((n - window) / stride) + 1.
std::vector<std::vector<double>> frame_signal(const AudioClip& clip, int window_size,
                                              int window_stride);

// w[k] = 0.5 * (1 - cos(2 pi k / (n - 1))), endpoints zero.
std::vector<double> hann_window(int n);

// |DFT| bins 0..N/2 of an already-windowed frame. Builds a throwaway plan;
// use Featurizer (or DftPlan directly) for bulk work.
std::vector<double> dft_magnitude(const std::vector<double>& frame);

std::vector<double> log_compress(std::vector<double> magnitudes, double log_offset);

// Mean-pools contiguous equal ranges of bins down to num_buckets values.
std::vector<double> bucketize_mean(const std::vector<double>& log_magnitudes, int num_buckets);

// Triangular mel filterbank over [0, sr/2]; each filter's weights are
// normalized to sum to one, so a flat spectrum yields flat filter outputs.
class MelFilterbank {
 public:
  MelFilterbank() = default;
  MelFilterbank(int num_mel, int dft_size, double sample_rate);

  int num_mel() const { return num_mel_; }
  std::vector<double> apply(const std::vector<double>& magnitudes) const;

 private:
  int num_mel_ = 0;
  int num_bins_ = 0;
  std::vector<std::vector<std::pair<int, double>>> filters_;
};

inline constexpr int kNumMelFilters = 40;

// Full-length DCT-II: X_k = sum_n x_n cos(pi (n + 0.5) k / N).
std::vector<double> dct2(const std::vector<double>& x);

// mel energies -> log -> DCT-II -> first num_buckets coefficients.
std::vector<double> bucketize_mfcc(const std::vector<double>& magnitudes, int num_buckets,
                                   const MelFilterbank& mel, double log_offset);

// Box-filter resampling with fractional-overlap weights; exact identity when
// sizes match.
std::vector<double> resample_area(const std::vector<double>& in, int in_h, int in_w, int out_h,
                                  int out_w);

// Frame feature vectors (time order) -> image with rows = buckets and
// columns = frames, min-max normalized per image (constant images map to
// 0.5), then area-resampled to out_h x out_w.
FeatureImage assemble_image(const std::vector<std::vector<double>>& frame_features, int out_h,
                            int out_w);

// Binary raster of the waveform: time left-to-right, +1 at the top row, -1
// at the bottom. Each column covers a contiguous sample bin; the trace fills
// the bin's min..max rows and bridges to the previous column.
FeatureImage amplitude_plot(const AudioClip& clip, int out_h = 100, int out_w = 100);

// Config plus the precomputed window / DFT plan / filterbank for it.
class Featurizer {
 public:
  explicit Featurizer(SpectrogramConfig config);

  const SpectrogramConfig& config() const { return config_; }
  int output_height() const { return out_h_; }
  int output_width() const { return out_w_; }

  FeatureImage featurize(const AudioClip& clip) const;

 private:
  SpectrogramConfig config_;
  int out_h_ = 0;
  int out_w_ = 0;
  std::vector<double> window_;
  DftPlan plan_{1};
  MelFilterbank mel_;
};

struct FeatureSet {
  FeatureMode mode = FeatureMode::Spectrogram;
  int height = 0;
  int width = 0;
  std::vector<FeatureImage> images;

  size_t size() const { return images.size(); }
};

void write_feature_cache(const FeatureSet& set, const std::filesystem::path& path);
FeatureSet read_feature_cache(const std::filesystem::path& path);

// 8-bit binary PGM, pixel = round(255 * value).
void write_pgm(const FeatureImage& image, const std::filesystem::path& path);

}  // namespace kws
