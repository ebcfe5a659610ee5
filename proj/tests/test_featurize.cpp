#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "kws/featurize.hpp"
#include "testutil.hpp"

using namespace kws;

namespace {

AudioClip tone_clip(double freq, double amp = 0.5) {
  std::vector<float> s(16000);
  for (int i = 0; i < 16000; ++i)
    s[static_cast<size_t>(i)] = static_cast<float>(amp * std::sin(2.0 * kPi * freq * i / 16000.0));
  return clip_from_samples(std::move(s), "tone");
}

AudioClip random_clip(uint64_t seed) {
  Rng rng(seed);
  std::vector<float> s(16000);
  for (float& v : s) v = static_cast<float>(rng.uniform(-0.9, 0.9));
  return clip_from_samples(std::move(s), "rand");
}

}  // namespace

TEST_CASE("frame_signal counts and offsets") {
  const AudioClip clip = random_clip(1);
  SUBCASE("window 16000 stride 1 gives exactly one frame") {
    CHECK(frame_signal(clip, 16000, 1).size() == 1);
  }
  SUBCASE("30ms/10ms framing gives 98 frames") {
    const auto frames = frame_signal(clip, 480, 160);
    CHECK(frames.size() == 98);  // (16000 - 480) / 160 + 1
    // frame i starts at i * stride
    CHECK(frames[3][0] == doctest::Approx(clip.samples[3 * 160]));
  }
  SUBCASE("stride larger than the clip still yields the first frame") {
    CHECK(frame_signal(clip, 400, 16000).size() == 1);
  }
  SUBCASE("oversized window is a parameter error") {
    CHECK_THROWS_AS(frame_signal(clip, 16001, 160), ParamError);
  }
  SUBCASE("count matches the formula over a parameter grid") {
    for (int window : {100, 480, 777, 4000})
      for (int stride : {40, 160, 500, 5000}) {
        const auto frames = frame_signal(clip, window, stride);
        CHECK(static_cast<int>(frames.size()) == (16000 - window) / stride + 1);
      }
  }
}

TEST_CASE("hann window endpoints and symmetry") {
  SUBCASE("n=3 is [0, 1, 0]") {
    const auto w = hann_window(3);
    CHECK(w[0] == doctest::Approx(0.0));
    CHECK(w[1] == doctest::Approx(1.0));
    CHECK(w[2] == doctest::Approx(0.0));
  }
  SUBCASE("n=5 peaks at the midpoint") { CHECK(hann_window(5)[2] == doctest::Approx(1.0)); }
  SUBCASE("w[k] == w[n-1-k]") {
    for (int n : {4, 7, 480}) {
      const auto w = hann_window(n);
      for (int k = 0; k < n; ++k)
        CHECK(w[static_cast<size_t>(k)] ==
              doctest::Approx(w[static_cast<size_t>(n - 1 - k)]).epsilon(1e-12));
    }
  }
  SUBCASE("n < 2 is a parameter error") { CHECK_THROWS_AS(hann_window(1), ParamError); }
}

TEST_CASE("dft_magnitude against the reference transform") {
  SUBCASE("all-zero frame gives all-zero magnitudes") {
    const auto mags = dft_magnitude(std::vector<double>(64, 0.0));
    REQUIRE(mags.size() == 33);
    for (double m : mags) CHECK(m == 0.0);
  }
  SUBCASE("on-bin cosine concentrates at its bin") {
    for (int n : {64, 480}) {
      std::vector<double> frame(static_cast<size_t>(n));
      for (int k = 0; k < n; ++k) frame[static_cast<size_t>(k)] = std::cos(2.0 * kPi * 8.0 * k / n);
      const auto mags = dft_magnitude(frame);
      const auto arg =
          std::max_element(mags.begin(), mags.end()) - mags.begin();
      CHECK(arg == 8);
      CHECK(mags[8] == doctest::Approx(n / 2.0).epsilon(1e-9));
    }
  }
  SUBCASE("constant frame is DC only") {
    const int n = 100;
    const auto mags = dft_magnitude(std::vector<double>(n, 1.0));
    CHECK(mags[0] == doctest::Approx(static_cast<double>(n)).epsilon(1e-12));
    for (size_t k = 1; k < mags.size(); ++k) CHECK(mags[k] == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("matches the naive DFT for assorted sizes") {
    Rng rng(7);
    for (int n : {2, 3, 5, 8, 12, 37, 128, 480}) {
      std::vector<double> frame(static_cast<size_t>(n));
      for (double& v : frame) v = rng.uniform(-1.0, 1.0);
      const auto fast = DftPlan(n).transform(frame);
      const auto slow = test::naive_dft(frame);
      for (int k = 0; k < n; ++k)
        CHECK(std::abs(fast[static_cast<size_t>(k)] - slow[static_cast<size_t>(k)]) < 1e-8);
    }
  }
  SUBCASE("Parseval holds on random windowed frames") {
    Rng rng(11);
    const auto hann = hann_window(480);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> frame(480);
      for (size_t i = 0; i < frame.size(); ++i)
        frame[i] = rng.uniform(-1.0, 1.0) * hann[i];
      const auto spectrum = DftPlan(480).transform(frame);
      double lhs = 0.0;
      for (const auto& x : spectrum) lhs += std::norm(x);
      double rhs = 0.0;
      for (double v : frame) rhs += v * v;
      rhs *= 480.0;
      CHECK(std::abs(lhs - rhs) <= 1e-6 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST_CASE("log_compress") {
  const auto out = log_compress({0.0, 1.0 - 1e-6, 2.0}, 1e-6);
  CHECK(out[0] == doctest::Approx(std::log(1e-6)));
  CHECK(out[0] == doctest::Approx(-13.8155).epsilon(1e-4));
  CHECK(out[1] == doctest::Approx(0.0).epsilon(1e-9));
  SUBCASE("monotone in the magnitude") {
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
      const double a = rng.uniform(0.0, 10.0);
      const double b = a + rng.uniform(1e-9, 1.0);
      const auto v = log_compress({a, b}, 1e-6);
      CHECK(v[0] < v[1]);
    }
  }
}

TEST_CASE("bucketize_mean pools contiguous ranges") {
  SUBCASE("bucket count equal to input length is the identity") {
    const std::vector<double> v = {3.0, -1.0, 2.5, 0.0};
    CHECK(bucketize_mean(v, 4) == v);
  }
  SUBCASE("constant input stays constant for any bucket count") {
    const std::vector<double> v(241, 1.25);
    for (int n : {1, 7, 40, 241}) {
      const auto out = bucketize_mean(v, n);
      REQUIRE(static_cast<int>(out.size()) == n);
      for (double x : out) CHECK(x == doctest::Approx(1.25).epsilon(1e-12));
    }
  }
  SUBCASE("too many buckets is a parameter error") {
    CHECK_THROWS_AS(bucketize_mean(std::vector<double>(10, 0.0), 11), ParamError);
  }
}

TEST_CASE("mfcc path concentrates a flat spectrum in coefficient zero") {
  const MelFilterbank mel(kNumMelFilters, 480, kSampleRate);
  const std::vector<double> flat(241, 1.0);
  const auto coeffs = bucketize_mfcc(flat, 40, mel, 1e-6);
  REQUIRE(coeffs.size() == 40);
  // log of a flat filterbank output is constant; DCT-II of a constant vector
  // is all in coefficient 0
  CHECK(std::abs(coeffs[0]) > 1e-6);
  for (size_t k = 1; k < coeffs.size(); ++k)
    CHECK(std::abs(coeffs[k]) < 1e-9 * std::abs(coeffs[0]) + 1e-12);
}

TEST_CASE("dct2 of a constant vector") {
  const auto c = dct2(std::vector<double>(8, 2.0));
  CHECK(c[0] == doctest::Approx(16.0));
  for (size_t k = 1; k < c.size(); ++k) CHECK(c[k] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("assemble_image normalizes and resamples") {
  SUBCASE("98x40 feature map lands in a 28x28 unit-range image") {
    Rng rng(3);
    std::vector<std::vector<double>> feats(98, std::vector<double>(40));
    for (auto& f : feats)
      for (double& v : f) v = rng.uniform(-20.0, 5.0);
    const FeatureImage img = assemble_image(feats, 28, 28);
    CHECK(img.height == 28);
    CHECK(img.width == 28);
    for (float p : img.pixels) {
      CHECK(p >= 0.0f);
      CHECK(p <= 1.0f);
    }
  }
  SUBCASE("constant features map to 0.5 everywhere") {
    const std::vector<std::vector<double>> feats(10, std::vector<double>(6, 3.7));
    const FeatureImage img = assemble_image(feats, 6, 10);
    for (float p : img.pixels) CHECK(p == 0.5f);
  }
  SUBCASE("matching output size makes resampling the identity") {
    Rng rng(4);
    std::vector<std::vector<double>> feats(5, std::vector<double>(3));
    for (auto& f : feats)
      for (double& v : f) v = rng.uniform(0.0, 1.0);
    const FeatureImage img = assemble_image(feats, 3, 5);
    // normalize by hand and compare
    double lo = 1e300, hi = -1e300;
    for (const auto& f : feats)
      for (double v : f) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 5; ++c)
        CHECK(img.at(r, c) ==
              doctest::Approx((feats[static_cast<size_t>(c)][static_cast<size_t>(r)] - lo) /
                              (hi - lo))
                  .epsilon(1e-6));
  }
}

TEST_CASE("resample_area identity and averaging") {
  const std::vector<double> in = {1.0, 2.0, 3.0, 4.0};
  SUBCASE("identity when sizes match") { CHECK(resample_area(in, 2, 2, 2, 2) == in); }
  SUBCASE("full reduction averages everything") {
    const auto out = resample_area(in, 2, 2, 1, 1);
    CHECK(out.size() == 1);
    CHECK(out[0] == doctest::Approx(2.5));
  }
}

TEST_CASE("amplitude_plot rasters the waveform") {
  SUBCASE("zero clip draws one horizontal line near the middle") {
    const AudioClip clip = clip_from_samples(std::vector<float>(16000, 0.0f), "z");
    const FeatureImage img = amplitude_plot(clip);
    for (int c = 0; c < 100; ++c) {
      int lit = 0, lit_row = -1;
      for (int r = 0; r < 100; ++r)
        if (img.at(r, c) == 1.0f) {
          ++lit;
          lit_row = r;
        }
      CHECK(lit == 1);
      CHECK(lit_row == 50);  // round((100 - 1) / 2) rounds half away from zero
    }
  }
  SUBCASE("constant +1 clip hits the top row") {
    const AudioClip clip = clip_from_samples(std::vector<float>(16000, 1.0f), "one");
    const FeatureImage img = amplitude_plot(clip);
    for (int c = 0; c < 100; ++c) CHECK(img.at(0, c) == 1.0f);
  }
  SUBCASE("every column has at least one lit pixel") {
    const FeatureImage img = amplitude_plot(random_clip(8));
    for (int c = 0; c < 100; ++c) {
      float colmax = 0.0f;
      for (int r = 0; r < 100; ++r) colmax = std::max(colmax, img.at(r, c));
      CHECK(colmax == 1.0f);
    }
  }
  SUBCASE("pixels are strictly binary") {
    const FeatureImage img = amplitude_plot(random_clip(9));
    for (float p : img.pixels) CHECK((p == 0.0f || p == 1.0f));
  }
}

TEST_CASE("featurizer end to end") {
  SUBCASE("spectral default geometry is 28x28") {
    SpectrogramConfig cfg;
    cfg.mode = FeatureMode::Spectrogram;
    const Featurizer f(cfg);
    const FeatureImage img = f.featurize(tone_clip(1000.0));
    CHECK(img.height == 28);
    CHECK(img.width == 28);
    CHECK(img.mode == FeatureMode::Spectrogram);
    for (float p : img.pixels) {
      CHECK(p >= 0.0f);
      CHECK(p <= 1.0f);
    }
  }
  SUBCASE("native geometry is buckets x frames") {
    SpectrogramConfig cfg;
    cfg.mode = FeatureMode::Mfcc;
    cfg.output_height = 0;
    cfg.output_width = 0;
    const Featurizer f(cfg);
    CHECK(f.output_height() == 40);
    CHECK(f.output_width() == 98);
    const FeatureImage img = f.featurize(tone_clip(440.0));
    CHECK(img.height == 40);
    CHECK(img.width == 98);
  }
  SUBCASE("amplitude mode is 100x100") {
    SpectrogramConfig cfg;
    cfg.mode = FeatureMode::AmplitudePlot;
    const Featurizer f(cfg);
    const FeatureImage img = f.featurize(tone_clip(440.0));
    CHECK(img.height == 100);
    CHECK(img.width == 100);
  }
  SUBCASE("same clip and config give bit-identical images") {
    SpectrogramConfig cfg;
    const Featurizer f(cfg);
    const AudioClip clip = random_clip(77);
    const FeatureImage a = f.featurize(clip);
    const FeatureImage b = f.featurize(clip);
    CHECK(a.pixels == b.pixels);
  }
  SUBCASE("silence stays within the pixel range") {
    SpectrogramConfig cfg;
    const Featurizer f(cfg);
    const FeatureImage img = f.featurize(clip_from_samples(std::vector<float>(16000, 0.0f), "s"));
    for (float p : img.pixels) {
      CHECK(p >= 0.0f);
      CHECK(p <= 1.0f);
    }
  }
  SUBCASE("config validation rejects bad bucket counts") {
    SpectrogramConfig cfg;
    cfg.window_size = 64;
    cfg.num_buckets = 40;  // > 64/2 + 1
    CHECK_THROWS_AS(cfg.validate(), ParamError);
  }
}

TEST_CASE("pure tone localizes to its bucket in spectrogram mode") {
  // rectangular window (bucket pooling applied straight to the DFT of the
  // unwindowed frame) so the tone is exactly on-bin
  const int n = 480;
  for (int bin : {4, 8, 16}) {
    std::vector<double> frame(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k)
      frame[static_cast<size_t>(k)] = std::cos(2.0 * kPi * bin * k / static_cast<double>(n));
    const auto logmags = log_compress(dft_magnitude(frame), 1e-6);
    const int buckets = 40;
    const auto pooled = bucketize_mean(logmags, buckets);
    const auto arg = std::max_element(pooled.begin(), pooled.end()) - pooled.begin();
    const int expected = static_cast<int>(static_cast<int64_t>(bin) * buckets / 241);
    CHECK(arg == expected);
  }
}

TEST_CASE("feature cache round-trips") {
  SpectrogramConfig cfg;
  const Featurizer f(cfg);
  FeatureSet set;
  set.mode = cfg.mode;
  set.height = f.output_height();
  set.width = f.output_width();
  for (int i = 0; i < 5; ++i) {
    FeatureImage img = f.featurize(random_clip(100 + static_cast<uint64_t>(i)));
    img.label = i % 12;
    set.images.push_back(std::move(img));
  }
  const auto dir = test::scratch_dir("cache");
  const auto path = dir / "feat.bin";
  write_feature_cache(set, path);
  const FeatureSet back = read_feature_cache(path);
  REQUIRE(back.images.size() == 5);
  CHECK(back.mode == set.mode);
  CHECK(back.height == set.height);
  CHECK(back.width == set.width);
  for (size_t i = 0; i < 5; ++i) {
    CHECK(back.images[i].label == set.images[i].label);
    CHECK(back.images[i].provenance == set.images[i].provenance);
    CHECK(back.images[i].pixels == set.images[i].pixels);
  }

  SUBCASE("truncated cache is a format error") {
    auto bytes = test::read_bytes(path);
    bytes.resize(bytes.size() / 2);
    std::ofstream(dir / "trunc.bin", std::ios::binary)
        .write(reinterpret_cast<const char*>(bytes.data()),
               static_cast<std::streamsize>(bytes.size()));
    CHECK_THROWS_AS(read_feature_cache(dir / "trunc.bin"), FormatError);
  }
  SUBCASE("wrong magic is a format error") {
    std::ofstream(dir / "junk.bin", std::ios::binary) << "not a cache";
    CHECK_THROWS_AS(read_feature_cache(dir / "junk.bin"), FormatError);
  }
}

TEST_CASE("pgm dump") {
  FeatureImage img;
  img.height = 2;
  img.width = 3;
  img.pixels = {0.0f, 0.5f, 1.0f, 0.25f, 0.75f, 1.0f};
  const auto dir = test::scratch_dir("pgm");
  write_pgm(img, dir / "img.pgm");
  const auto bytes = test::read_bytes(dir / "img.pgm");
  const std::string header = "P5\n3 2\n255\n";
  REQUIRE(bytes.size() == header.size() + 6);
  CHECK(std::equal(header.begin(), header.end(), bytes.begin()));
  CHECK(bytes[header.size()] == 0);
  CHECK(bytes[header.size() + 1] == 128);  // round(0.5 * 255)
  CHECK(bytes[header.size() + 2] == 255);
}
