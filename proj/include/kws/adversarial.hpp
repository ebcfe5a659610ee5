#pragma once

#include "kws/featurize.hpp"
#include "kws/models.hpp"

namespace kws {

struct AugmentConfig {
  double sign_epsilon = 0.001;
  double std_coefficient = 0.001;
  bool sign_enabled = true;
  bool std_enabled = true;

  void validate() const {
    if (sign_epsilon < 0.0) throw ParamError("sign_epsilon must be >= 0");
    if (std_coefficient < 0.0) throw ParamError("std_coefficient must be >= 0");
  }
};

// raw 0..255 intensities -> [0,1] pixels.
FeatureImage normalize_pixels(const std::vector<float>& raw, int height, int width,
                              FeatureMode mode = FeatureMode::Spectrogram, int label = -1);

// Population standard deviation over all pixels.
double pixel_std(const FeatureImage& image);

// X + epsilon * sign(X), clamped to [0,1]; sign(0) = 0.
FeatureImage sign_perturb(const FeatureImage& image, double epsilon);

// X + coefficient * std(X): one scalar shift for the whole image, clamped.
FeatureImage std_perturb(const FeatureImage& image, double coefficient = 0.001);

// originals, then the sign-perturbed block, then the std-perturbed block,
// labels copied. provenance bytes: 0 original, 1 sign, 2 std.
FeatureSet augment_dataset(const FeatureSet& train, const AugmentConfig& config);

// Perturbation along the sign of d(loss)/d(input) through the given model.
FeatureImage fgsm_perturb(const Network<float>& net, const FeatureImage& image, int label,
                          double epsilon);

}  // namespace kws
