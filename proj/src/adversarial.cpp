#include "kws/adversarial.hpp"

#include <cmath>

namespace kws {

namespace {

float clamp01(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

}  // namespace

FeatureImage normalize_pixels(const std::vector<float>& raw, int height, int width,
                              FeatureMode mode, int label) {
  if (static_cast<long long>(raw.size()) != static_cast<long long>(height) * width)
    throw ShapeError("raw pixel count does not match the image size");
  FeatureImage img;
  img.height = height;
  img.width = width;
  img.mode = mode;
  img.label = label;
  img.pixels.resize(raw.size());
  for (size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] < 0.0f || raw[i] > 255.0f)
      throw ParamError("raw intensity " + std::to_string(raw[i]) + " outside [0, 255]");
    img.pixels[i] = raw[i] / 255.0f;
  }
  return img;
}

double pixel_std(const FeatureImage& image) {
  if (image.pixels.empty()) return 0.0;
  double mean = 0.0;
  for (const float v : image.pixels) mean += v;
  mean /= static_cast<double>(image.pixels.size());
  double var = 0.0;
  for (const float v : image.pixels) {
    const double d = v - mean;
    var += d * d;
  }
  return std::sqrt(var / static_cast<double>(image.pixels.size()));
}

FeatureImage sign_perturb(const FeatureImage& image, double epsilon) {
  if (epsilon < 0.0) throw ParamError("sign_epsilon must be >= 0");
  FeatureImage out = image;
  out.provenance = 1;
  for (size_t i = 0; i < out.pixels.size(); ++i) {
    const double v = image.pixels[i];
    const double s = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    out.pixels[i] = clamp01(v + epsilon * s);
  }
  return out;
}

FeatureImage std_perturb(const FeatureImage& image, double coefficient) {
  if (coefficient < 0.0) throw ParamError("std_coefficient must be >= 0");
  const double shift = coefficient * pixel_std(image);
  FeatureImage out = image;
  out.provenance = 2;
  for (size_t i = 0; i < out.pixels.size(); ++i)
    out.pixels[i] = clamp01(static_cast<double>(image.pixels[i]) + shift);
  return out;
}

FeatureSet augment_dataset(const FeatureSet& train, const AugmentConfig& config) {
  config.validate();
  if (train.images.empty()) throw ParamError("augment_dataset needs a nonempty train set");
  FeatureSet out;
  out.mode = train.mode;
  out.height = train.height;
  out.width = train.width;
  const size_t blocks = 1 + (config.sign_enabled ? 1 : 0) + (config.std_enabled ? 1 : 0);
  out.images.reserve(train.images.size() * blocks);
  for (const FeatureImage& img : train.images) out.images.push_back(img);
  if (config.sign_enabled)
    for (const FeatureImage& img : train.images)
      out.images.push_back(sign_perturb(img, config.sign_epsilon));
  if (config.std_enabled)
    for (const FeatureImage& img : train.images)
      out.images.push_back(std_perturb(img, config.std_coefficient));
  return out;
}

FeatureImage fgsm_perturb(const Network<float>& net, const FeatureImage& image, int label,
                          double epsilon) {
  if (epsilon < 0.0) throw ParamError("epsilon must be >= 0");
  Tensor<float> batch({1, image.height, image.width, 1}, image.pixels);
  Tape<float> tape;
  Var<float> input_var;
  const auto fw = net.forward(tape, batch, /*training=*/false, 0, /*track_input=*/true,
                              &input_var);
  const Var<float> loss = softmax_cross_entropy(tape, fw.logits, std::vector<int>{label});
  tape.backward(loss);
  const std::vector<float>& g = tape.grad(input_var);
  FeatureImage out = image;
  out.provenance = 1;
  for (size_t i = 0; i < out.pixels.size(); ++i) {
    const double s = g[i] > 0.0f ? 1.0 : (g[i] < 0.0f ? -1.0 : 0.0);
    out.pixels[i] = clamp01(static_cast<double>(image.pixels[i]) + epsilon * s);
  }
  return out;
}

}  // namespace kws
