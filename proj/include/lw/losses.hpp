#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "lw/feature_map.hpp"

namespace lw {

// Pluggable image -> feature-pyramid mapping standing in for the pretrained
// perceptual / face networks. Implementations must be deterministic.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::vector<FeatureMap> extract(const FeatureMap& image) const = 0;
  // Input size the face-identity crop is resized to.
  virtual std::pair<int, int> input_size() const { return {112, 112}; }
  virtual std::string name() const = 0;
};

// Single layer: the image itself. Turns the perceptual losses into plain
// L1 distances.
class IdentityExtractor final : public FeatureExtractor {
 public:
  std::vector<FeatureMap> extract(const FeatureMap& image) const override {
    return {image};
  }
  std::string name() const override { return "identity"; }
};

// Stack of stride-2 convolutions (same padding, tanh) with fixed weights.
class ConvStackExtractor final : public FeatureExtractor {
 public:
  struct ConvLayer {
    int in_channels = 0;
    int out_channels = 0;
    int kernel = 3;
    int stride = 2;
    std::vector<float> weights;  // [out][in][k][k]
    std::vector<float> bias;     // [out]
  };

  explicit ConvStackExtractor(std::vector<ConvLayer> layers, std::string name);

  std::vector<FeatureMap> extract(const FeatureMap& image) const override;
  std::string name() const override { return name_; }

  // The built-in deterministic extractor: 3 layers of seeded 3x3 stride-2
  // convolutions (seed 0x1D57).
  static ConvStackExtractor toy();

  // Round-trippable weights blob (magic "LWFX").
  void save(const std::string& path) const;
  static ConvStackExtractor load(const std::string& path);

  const std::vector<ConvLayer>& layers() const { return layers_; }

 private:
  std::vector<ConvLayer> layers_;
  std::string name_;
};

std::unique_ptr<FeatureExtractor> make_extractor(const std::string& spec);

enum class Reduction { kMean, kSum };

struct LossWeights {
  double lambda_p = 10.0;
  double lambda_f = 5.0;
  double lambda_a = 1.0;
};

struct FaceBox {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

// Sum over layers of mean |f(a) - f(b)|, over both image pairs.
double perceptual_loss(const FeatureExtractor& f, const FeatureMap& synth_source,
                       const FeatureMap& source, const FeatureMap& synth_target,
                       const FeatureMap& reference);

// Both images cropped to the face box, resized to the extractor input size,
// then layerwise mean-L1.
double face_identity_loss(const FeatureExtractor& g, const FeatureMap& synth_target,
                          const FeatureMap& reference, const FaceBox& box);

// LSGAN(-1,1,0) objectives over patch score maps.
double adversarial_loss_g(const FeatureMap& fake_scores,
                          Reduction reduction = Reduction::kMean);
double adversarial_loss_d(const FeatureMap& fake_scores,
                          const FeatureMap& real_scores,
                          Reduction reduction = Reduction::kMean);

// Sum of squared forward differences, exactly as defined (no averaging).
double tv(const FeatureMap& single_channel);

double attention_reg_loss(const FeatureMap& source_attention,
                          const FeatureMap& source_silhouette,
                          const FeatureMap& target_attention,
                          const FeatureMap& target_silhouette,
                          Reduction reduction = Reduction::kMean);

double total_generator_loss(const LossWeights& weights, double perceptual,
                            double face, double attention, double adversarial);

// Mean local SSIM over 11x11 Gaussian windows (sigma 1.5, K1=0.01, K2=0.03),
// dynamic range 1 on [0,1] images; 3-channel inputs are converted to luma.
double ssim(const FeatureMap& a, const FeatureMap& b);

// Align-corners bilinear resize (shared by face_identity_loss and the CLI).
FeatureMap resize_bilinear(const FeatureMap& image, int width, int height);

FeatureMap crop(const FeatureMap& image, const FaceBox& box);

}  // namespace lw
