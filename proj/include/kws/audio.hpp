#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kws/error.hpp"
#include "kws/rng.hpp"

namespace kws {

inline constexpr int kSampleRate = 16000;
inline constexpr int kClipSamples = 16000;

inline constexpr int kNumClasses = 12;
inline constexpr int kUnknownLabel = 10;
inline constexpr int kSilenceLabel = 11;

// One second of normalized mono audio. Always exactly kClipSamples samples,
// each in [-1, 1].
struct AudioClip {
  std::vector<float> samples;
  int sample_rate = kSampleRate;
  std::string source_path;
};

struct Label {
  int index = kUnknownLabel;
  std::string_view name() const;
};

// Folder name -> label. The ten command words map to 0..9 in fixed order,
// anything else is UNKNOWN. Returns nullopt for "_background_noise_", whose
// files are noise sources rather than examples.
std::optional<Label> assign_label(std::string_view folder_name);
Label label_from_index(int index);

enum class Partition : uint8_t { Train, Validation };

struct ManifestEntry {
  std::string path;  // relative to the dataset root; "_silence_/..." entries are synthesized
  int label = kUnknownLabel;
  Partition partition = Partition::Train;
};

struct DatasetManifest {
  std::vector<ManifestEntry> examples;
  uint64_t seed = 0;
};

bool is_silence_path(std::string_view path);

// Normalizes int16 PCM by 1/32768, right-zero-pads short clips and drops
// leading samples of long ones so the result is exactly one second.
AudioClip clip_from_samples(std::vector<float> samples, std::string source_path);

// Strict loader: RIFF/WAVE, PCM tag 1, mono, 16-bit, 16 kHz. Anything else
// throws FormatError / UnsupportedFormatError naming the offending field.
AudioClip load_wav(const std::filesystem::path& path);

// Same validation, but keeps the file's native length (noise sources may be
// much longer than one second).
std::vector<float> load_wav_samples(const std::filesystem::path& path);

void write_wav(const std::filesystem::path& path, const std::vector<float>& samples);

// Scans <root>/<word>/*.wav, hashes each relative path with the seed, sorts
// by hash and cuts at round(n * split_ratio). Optionally appends synthesized
// SILENCE pseudo-entries at `silence_fraction` of each partition's size.
// max_per_class > 0 caps each word folder (hash-ordered selection) for
// desk-scale runs.
DatasetManifest build_manifest(const std::filesystem::path& root, double split_ratio,
                               uint64_t seed, double silence_fraction = 0.0,
                               int max_per_class = 0);

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path);

// Noise sources under <root>/_background_noise_/, native length.
std::vector<std::vector<float>> load_noise_sources(const std::filesystem::path& root);

// A random one-second window of a random noise source, unscaled.
AudioClip noise_window(const std::vector<std::vector<float>>& noise, Rng& rng,
                       std::string source_path);

// One silence example: a random one-second window of a random noise source,
// scaled by a random amplitude in [0, 1].
AudioClip make_silence_clip(const std::vector<std::vector<float>>& noise, Rng& rng,
                            std::string source_path);
std::vector<AudioClip> make_silence(const std::vector<std::vector<float>>& noise, int count,
                                    uint64_t seed);

// out[i] = clamp(clip[i] + ratio * noise[i], -1, 1). ratio is an amplitude
// ratio in [0, 1]; 0.5 corresponds to roughly 6 dB SNR.
AudioClip mix_noise(const AudioClip& clip, const AudioClip& noise, double ratio);

}  // namespace kws
