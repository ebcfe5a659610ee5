#include "kws/audio.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace kws {

static_assert(std::endian::native == std::endian::little,
              "wav/cache serialization assumes a little-endian host");

namespace {

constexpr std::array<std::string_view, kNumClasses> kLabelNames = {
    "YES", "NO",  "UP",   "DOWN", "LEFT",    "RIGHT",
    "ON",  "OFF", "STOP", "GO",   "UNKNOWN", "SILENCE"};

constexpr std::array<std::string_view, 10> kCommandWords = {
    "yes", "no", "up", "down", "left", "right", "on", "off", "stop", "go"};

constexpr std::string_view kBackgroundDir = "_background_noise_";
constexpr std::string_view kSilenceDir = "_silence_";

uint16_t read_u16(const uint8_t* p) { return static_cast<uint16_t>(p[0] | p[1] << 8); }
uint32_t read_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

std::vector<uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return bytes;
}

// Parses the container, validates the fmt chunk and returns normalized
// samples at native length.
std::vector<float> decode_wav(const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = read_file(path);
  const std::string name = path.string();
  if (bytes.size() < 44) throw FormatError(name + ": truncated RIFF header");
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw FormatError(name + ": not a RIFF/WAVE file");

  bool have_fmt = false;
  size_t pos = 12;
  std::vector<float> samples;
  while (pos + 8 <= bytes.size()) {
    char id[5] = {};
    std::memcpy(id, bytes.data() + pos, 4);
    const uint32_t chunk_size = read_u32(bytes.data() + pos + 4);
    pos += 8;
    if (pos + chunk_size > bytes.size())
      throw FormatError(name + ": chunk '" + id + "' exceeds file size");
    if (std::strcmp(id, "fmt ") == 0) {
      if (chunk_size < 16) throw FormatError(name + ": fmt chunk too small");
      const uint16_t format_tag = read_u16(bytes.data() + pos);
      const uint16_t channels = read_u16(bytes.data() + pos + 2);
      const uint32_t sample_rate = read_u32(bytes.data() + pos + 4);
      const uint16_t bits = read_u16(bytes.data() + pos + 14);
      if (format_tag != 1)
        throw UnsupportedFormatError(name + ": format tag " + std::to_string(format_tag) +
                                     " (expected PCM = 1)");
      if (channels != 1)
        throw UnsupportedFormatError(name + ": channel count " + std::to_string(channels) +
                                     " (expected mono)");
      if (sample_rate != static_cast<uint32_t>(kSampleRate))
        throw UnsupportedFormatError(name + ": sample rate " + std::to_string(sample_rate) +
                                     " (expected 16000)");
      if (bits != 16)
        throw UnsupportedFormatError(name + ": bits per sample " + std::to_string(bits) +
                                     " (expected 16)");
      have_fmt = true;
    } else if (std::strcmp(id, "data") == 0) {
      if (!have_fmt) throw FormatError(name + ": data chunk before fmt chunk");
      const size_t n = chunk_size / 2;
      samples.resize(n);
      for (size_t i = 0; i < n; ++i) {
        const auto v = static_cast<int16_t>(read_u16(bytes.data() + pos + 2 * i));
        samples[i] = static_cast<float>(v) / 32768.0f;
      }
      return samples;
    }
    pos += chunk_size + (chunk_size & 1);  // chunks are 2-byte aligned
  }
  throw FormatError(name + (have_fmt ? ": missing data chunk" : ": missing fmt chunk"));
}

uint64_t split_key(std::string_view relative_path, uint64_t seed) {
  return mix64(fnv1a64(relative_path) ^ mix64(seed));
}

}  // namespace

std::string_view Label::name() const { return kLabelNames.at(static_cast<size_t>(index)); }

Label label_from_index(int index) {
  if (index < 0 || index >= kNumClasses)
    throw ParamError("label index " + std::to_string(index) + " out of range [0, 11]");
  return Label{index};
}

std::optional<Label> assign_label(std::string_view folder_name) {
  if (folder_name == kBackgroundDir) return std::nullopt;
  if (folder_name == kSilenceDir) return Label{kSilenceLabel};
  for (size_t i = 0; i < kCommandWords.size(); ++i)
    if (folder_name == kCommandWords[i]) return Label{static_cast<int>(i)};
  return Label{kUnknownLabel};
}

bool is_silence_path(std::string_view path) {
  return path.substr(0, kSilenceDir.size()) == kSilenceDir;
}

AudioClip clip_from_samples(std::vector<float> samples, std::string source_path) {
  if (samples.size() > static_cast<size_t>(kClipSamples))
    samples.erase(samples.begin(),
                  samples.begin() + (samples.size() - static_cast<size_t>(kClipSamples)));
  samples.resize(kClipSamples, 0.0f);
  for (float& s : samples) s = std::clamp(s, -1.0f, 1.0f);
  return AudioClip{std::move(samples), kSampleRate, std::move(source_path)};
}

AudioClip load_wav(const std::filesystem::path& path) {
  return clip_from_samples(decode_wav(path), path.string());
}

std::vector<float> load_wav_samples(const std::filesystem::path& path) {
  return decode_wav(path);
}

void write_wav(const std::filesystem::path& path, const std::vector<float>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const uint32_t data_size = static_cast<uint32_t>(samples.size() * 2);
  const uint32_t riff_size = 36 + data_size;
  auto put_u32 = [&](uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  auto put_u16 = [&](uint16_t v) { out.write(reinterpret_cast<const char*>(&v), 2); };
  out.write("RIFF", 4);
  put_u32(riff_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put_u32(16);
  put_u16(1);  // PCM
  put_u16(1);  // mono
  put_u32(kSampleRate);
  put_u32(kSampleRate * 2);  // byte rate
  put_u16(2);                // block align
  put_u16(16);               // bits
  out.write("data", 4);
  put_u32(data_size);
  for (const float s : samples) {
    const double scaled = std::clamp(static_cast<double>(s), -1.0, 1.0) * 32768.0;
    const auto v = static_cast<int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    put_u16(static_cast<uint16_t>(v));
  }
  if (!out) throw IoError("write failed for " + path.string());
}

DatasetManifest build_manifest(const std::filesystem::path& root, double split_ratio,
                               uint64_t seed, double silence_fraction, int max_per_class) {
  namespace fs = std::filesystem;
  if (split_ratio < 0.0 || split_ratio > 1.0)
    throw ParamError("split_ratio must be in [0, 1]");
  if (silence_fraction < 0.0 || silence_fraction > 1.0)
    throw ParamError("silence_fraction must be in [0, 1]");
  if (max_per_class < 0) throw ParamError("max_per_class must be >= 0");
  if (!fs::is_directory(root)) throw EmptyDatasetError("not a directory: " + root.string());

  struct WordFile {
    std::string path;
    int label;
  };
  std::vector<WordFile> files;
  for (const auto& dir : fs::directory_iterator(root)) {
    if (!dir.is_directory()) continue;
    const std::string word = dir.path().filename().string();
    const std::optional<Label> label = assign_label(word);
    if (!label) continue;  // background noise is not an example
    std::vector<WordFile> word_files;
    for (const auto& entry : fs::directory_iterator(dir.path())) {
      if (!entry.is_regular_file() || entry.path().extension() != ".wav") continue;
      word_files.push_back({word + "/" + entry.path().filename().string(), label->index});
    }
    if (max_per_class > 0 && static_cast<int>(word_files.size()) > max_per_class) {
      std::sort(word_files.begin(), word_files.end(), [&](const WordFile& a, const WordFile& b) {
        const uint64_t ka = split_key(a.path, seed);
        const uint64_t kb = split_key(b.path, seed);
        return ka != kb ? ka < kb : a.path < b.path;
      });
      word_files.resize(static_cast<size_t>(max_per_class));
    }
    files.insert(files.end(), word_files.begin(), word_files.end());
  }
  if (files.empty()) throw EmptyDatasetError("no wav files under " + root.string());

  // Sort by hash key: a seeded shuffle that is a pure function of the file
  // list, then cut at the rounded split point.
  std::sort(files.begin(), files.end(), [&](const WordFile& a, const WordFile& b) {
    const uint64_t ka = split_key(a.path, seed);
    const uint64_t kb = split_key(b.path, seed);
    return ka != kb ? ka < kb : a.path < b.path;
  });
  const auto n_train = static_cast<size_t>(
      std::llround(split_ratio * static_cast<double>(files.size())));

  DatasetManifest manifest;
  manifest.seed = seed;
  manifest.examples.reserve(files.size());
  for (size_t i = 0; i < files.size(); ++i) {
    manifest.examples.push_back(
        {files[i].path, files[i].label, i < n_train ? Partition::Train : Partition::Validation});
  }

  const auto add_silence = [&](Partition part, size_t word_count, uint64_t salt) {
    const auto count = static_cast<size_t>(
        std::llround(silence_fraction * static_cast<double>(word_count)));
    for (size_t i = 0; i < count; ++i) {
      // The id bakes the seed into the path so featurization can derive the
      // clip deterministically from the path alone.
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%016llx",
                    static_cast<unsigned long long>(mix64(seed ^ mix64(salt + i))));
      manifest.examples.push_back(
          {std::string(kSilenceDir) + "/" + buf, kSilenceLabel, part});
    }
  };
  add_silence(Partition::Train, n_train, 0x5317);
  add_silence(Partition::Validation, files.size() - n_train, 0x5A1D);

  // Stable order: train block then validation block, paths sorted.
  std::stable_sort(manifest.examples.begin(), manifest.examples.end(),
                   [](const ManifestEntry& a, const ManifestEntry& b) {
                     if (a.partition != b.partition)
                       return a.partition == Partition::Train;
                     return a.path < b.path;
                   });
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const ManifestEntry& e : manifest.examples) {
    out << e.path << '\t' << e.label << '\t'
        << (e.partition == Partition::Train ? "TRAIN" : "VALIDATION") << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  DatasetManifest manifest;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    ManifestEntry e;
    std::string label_text, part_text;
    if (!std::getline(ss, e.path, '\t') || !std::getline(ss, label_text, '\t') ||
        !std::getline(ss, part_text))
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected 3 fields");
    try {
      e.label = std::stoi(label_text);
    } catch (const std::exception&) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": bad label");
    }
    if (e.label < 0 || e.label >= kNumClasses)
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": label out of range");
    if (part_text == "TRAIN")
      e.partition = Partition::Train;
    else if (part_text == "VALIDATION")
      e.partition = Partition::Validation;
    else
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": bad partition");
    manifest.examples.push_back(std::move(e));
  }
  return manifest;
}

std::vector<std::vector<float>> load_noise_sources(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::vector<std::vector<float>> sources;
  const fs::path dir = root / std::string(kBackgroundDir);
  if (!fs::is_directory(dir)) return sources;
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".wav")
      paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());
  for (const fs::path& p : paths) sources.push_back(load_wav_samples(p));
  return sources;
}

AudioClip noise_window(const std::vector<std::vector<float>>& noise, Rng& rng,
                       std::string source_path) {
  if (noise.empty()) throw ParamError("at least one noise source is required");
  const std::vector<float>& src = noise[rng.below(noise.size())];
  std::vector<float> window(kClipSamples, 0.0f);
  if (src.size() > static_cast<size_t>(kClipSamples)) {
    const size_t start = rng.below(src.size() - kClipSamples + 1);
    std::copy_n(src.begin() + static_cast<long>(start), kClipSamples, window.begin());
  } else {
    std::copy(src.begin(), src.end(), window.begin());
  }
  for (float& s : window) s = std::clamp(s, -1.0f, 1.0f);
  return AudioClip{std::move(window), kSampleRate, std::move(source_path)};
}

AudioClip make_silence_clip(const std::vector<std::vector<float>>& noise, Rng& rng,
                            std::string source_path) {
  AudioClip clip = noise_window(noise, rng, std::move(source_path));
  const double amplitude = rng.uniform();
  for (float& s : clip.samples)
    s = std::clamp(static_cast<float>(amplitude * s), -1.0f, 1.0f);
  return clip;
}

std::vector<AudioClip> make_silence(const std::vector<std::vector<float>>& noise, int count,
                                    uint64_t seed) {
  if (count < 0) throw ParamError("silence count must be >= 0");
  if (noise.empty()) throw ParamError("make_silence requires at least one noise source");
  Rng rng(seed);
  std::vector<AudioClip> clips;
  clips.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i)
    clips.push_back(make_silence_clip(noise, rng, "_silence_/" + std::to_string(i)));
  return clips;
}

AudioClip mix_noise(const AudioClip& clip, const AudioClip& noise, double ratio) {
  if (ratio < 0.0 || ratio > 1.0) throw ParamError("noise ratio must be in [0, 1]");
  if (clip.samples.size() != static_cast<size_t>(kClipSamples) ||
      noise.samples.size() != static_cast<size_t>(kClipSamples))
    throw ParamError("mix_noise expects one-second clips");
  AudioClip out = clip;
  if (ratio == 0.0) return out;
  for (int i = 0; i < kClipSamples; ++i) {
    const double v = static_cast<double>(clip.samples[i]) +
                     ratio * static_cast<double>(noise.samples[i]);
    out.samples[i] = static_cast<float>(std::clamp(v, -1.0, 1.0));
  }
  return out;
}

}  // namespace kws
