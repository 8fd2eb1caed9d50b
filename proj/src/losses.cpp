#include "lw/losses.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "lw/flow.hpp"
#include "lw/warp.hpp"

namespace lw {

ConvStackExtractor::ConvStackExtractor(std::vector<ConvLayer> layers,
                                       std::string name)
    : layers_(std::move(layers)), name_(std::move(name)) {
  require(!layers_.empty(), "extractor needs at least one layer");
  for (const ConvLayer& l : layers_) {
    require(l.in_channels >= 1 && l.out_channels >= 1 && l.kernel >= 1 &&
                l.stride >= 1,
            "bad conv layer geometry");
    const size_t want =
        static_cast<size_t>(l.out_channels) * l.in_channels * l.kernel * l.kernel;
    require(l.weights.size() == want, "conv weight count mismatch");
    require(l.bias.size() == static_cast<size_t>(l.out_channels),
            "conv bias count mismatch");
  }
}

std::vector<FeatureMap> ConvStackExtractor::extract(const FeatureMap& image) const {
  require(image.channels == layers_.front().in_channels,
          "extractor expects " + std::to_string(layers_.front().in_channels) +
              "-channel input");
  std::vector<FeatureMap> features;
  FeatureMap current = image;
  for (const ConvLayer& l : layers_) {
    const int pad = l.kernel / 2;
    const int out_h = (current.height + 2 * pad - l.kernel) / l.stride + 1;
    const int out_w = (current.width + 2 * pad - l.kernel) / l.stride + 1;
    require(out_h >= 1 && out_w >= 1, "image too small for extractor");
    FeatureMap next(l.out_channels, out_h, out_w);
    for (int oc = 0; oc < l.out_channels; ++oc) {
      for (int oy = 0; oy < out_h; ++oy) {
        for (int ox = 0; ox < out_w; ++ox) {
          double acc = l.bias[oc];
          for (int ic = 0; ic < l.in_channels; ++ic) {
            for (int ky = 0; ky < l.kernel; ++ky) {
              const int iy = oy * l.stride - pad + ky;
              if (iy < 0 || iy >= current.height) continue;
              for (int kx = 0; kx < l.kernel; ++kx) {
                const int ix = ox * l.stride - pad + kx;
                if (ix < 0 || ix >= current.width) continue;
                const size_t wi =
                    ((static_cast<size_t>(oc) * l.in_channels + ic) * l.kernel + ky) *
                        l.kernel + kx;
                acc += static_cast<double>(l.weights[wi]) * current.at(ic, iy, ix);
              }
            }
          }
          next.at(oc, oy, ox) = static_cast<float>(std::tanh(acc));
        }
      }
    }
    features.push_back(next);
    current = std::move(next);
  }
  return features;
}

ConvStackExtractor ConvStackExtractor::toy() {
  std::mt19937 rng(0x1D57);
  // Uniform in [-s, s] drawn directly from the engine's own mapping of
  // mt19937 output; std::normal_distribution is not bit-stable across
  // standard libraries.
  auto draw = [&rng](float s) {
    return static_cast<float>((rng() / 4294967295.0 * 2.0 - 1.0) * s);
  };
  std::vector<ConvLayer> layers;
  int in_c = 3;
  for (int out_c : {8, 16, 32}) {
    ConvLayer l;
    l.in_channels = in_c;
    l.out_channels = out_c;
    l.kernel = 3;
    l.stride = 2;
    const float s = std::sqrt(1.0f / static_cast<float>(in_c * 9));
    l.weights.resize(static_cast<size_t>(out_c) * in_c * 9);
    for (float& w : l.weights) w = draw(s);
    l.bias.resize(out_c);
    for (float& b : l.bias) b = draw(0.05f);
    layers.push_back(std::move(l));
    in_c = out_c;
  }
  return ConvStackExtractor(std::move(layers), "toy");
}

namespace {
constexpr char kExtractorMagic[4] = {'L', 'W', 'F', 'X'};

void write_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}
uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}
}  // namespace

void ConvStackExtractor::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  require(os.good(), "cannot open " + path + " for writing");
  os.write(kExtractorMagic, 4);
  write_u32(os, static_cast<uint32_t>(layers_.size()));
  for (const ConvLayer& l : layers_) {
    write_u32(os, static_cast<uint32_t>(l.out_channels));
    write_u32(os, static_cast<uint32_t>(l.in_channels));
    write_u32(os, static_cast<uint32_t>(l.kernel));
    write_u32(os, static_cast<uint32_t>(l.stride));
    os.write(reinterpret_cast<const char*>(l.weights.data()),
             static_cast<std::streamsize>(l.weights.size() * sizeof(float)));
    os.write(reinterpret_cast<const char*>(l.bias.data()),
             static_cast<std::streamsize>(l.bias.size() * sizeof(float)));
  }
  require(os.good(), "failed writing " + path);
}

ConvStackExtractor ConvStackExtractor::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "cannot open extractor weights " + path);
  char magic[4];
  is.read(magic, 4);
  require(is.good() && std::memcmp(magic, kExtractorMagic, 4) == 0,
          path + " is not an extractor weights blob");
  const uint32_t n = read_u32(is);
  require(n >= 1 && n <= 64, "unreasonable extractor layer count");
  std::vector<ConvLayer> layers(n);
  for (ConvLayer& l : layers) {
    l.out_channels = static_cast<int>(read_u32(is));
    l.in_channels = static_cast<int>(read_u32(is));
    l.kernel = static_cast<int>(read_u32(is));
    l.stride = static_cast<int>(read_u32(is));
    require(is.good() && l.out_channels >= 1 && l.in_channels >= 1 &&
                l.kernel >= 1 && l.stride >= 1 && l.out_channels <= 4096 &&
                l.in_channels <= 4096 && l.kernel <= 33,
            "corrupt extractor layer header");
    l.weights.resize(static_cast<size_t>(l.out_channels) * l.in_channels *
                     l.kernel * l.kernel);
    l.bias.resize(l.out_channels);
    is.read(reinterpret_cast<char*>(l.weights.data()),
            static_cast<std::streamsize>(l.weights.size() * sizeof(float)));
    is.read(reinterpret_cast<char*>(l.bias.data()),
            static_cast<std::streamsize>(l.bias.size() * sizeof(float)));
    require(is.good(), "truncated extractor weights blob");
  }
  return ConvStackExtractor(std::move(layers), "external");
}

std::unique_ptr<FeatureExtractor> make_extractor(const std::string& spec) {
  if (spec == "toy")
    return std::make_unique<ConvStackExtractor>(ConvStackExtractor::toy());
  if (spec == "identity") return std::make_unique<IdentityExtractor>();
  if (spec.rfind("external:", 0) == 0)
    return std::make_unique<ConvStackExtractor>(
        ConvStackExtractor::load(spec.substr(9)));
  throw ValidationError("unknown extractor '" + spec +
                        "' (expected toy|identity|external:<path>)");
}

namespace {

double layerwise_mean_l1(const FeatureExtractor& f, const FeatureMap& a,
                         const FeatureMap& b) {
  std::vector<FeatureMap> fa = f.extract(a);
  std::vector<FeatureMap> fb = f.extract(b);
  double total = 0.0;
  for (size_t l = 0; l < fa.size(); ++l) {
    double acc = 0.0;
    for (size_t i = 0; i < fa[l].data.size(); ++i)
      acc += std::abs(static_cast<double>(fa[l].data[i]) - fb[l].data[i]);
    total += acc / static_cast<double>(fa[l].data.size());
  }
  return total;
}

double reduce_sq(const FeatureMap& m, double offset, Reduction reduction) {
  require(!m.data.empty(), "score map is empty");
  double acc = 0.0;
  for (float v : m.data) {
    require(std::isfinite(v), "score map must be finite");
    const double d = v + offset;
    acc += d * d;
  }
  return reduction == Reduction::kMean ? acc / static_cast<double>(m.data.size())
                                       : acc;
}

double reduce_sq_diff(const FeatureMap& a, const FeatureMap& b,
                      Reduction reduction) {
  require(a.same_shape(b), "map dimensions differ");
  double acc = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - b.data[i];
    acc += d * d;
  }
  return reduction == Reduction::kMean ? acc / static_cast<double>(a.data.size())
                                       : acc;
}

}  // namespace

double perceptual_loss(const FeatureExtractor& f, const FeatureMap& synth_source,
                       const FeatureMap& source, const FeatureMap& synth_target,
                       const FeatureMap& reference) {
  require(synth_source.same_shape(source) && synth_target.same_shape(reference) &&
              source.same_shape(reference),
          "perceptual_loss: image dimensions differ");
  return layerwise_mean_l1(f, synth_source, source) +
         layerwise_mean_l1(f, synth_target, reference);
}

FeatureMap crop(const FeatureMap& image, const FaceBox& box) {
  require(box.width >= 1 && box.height >= 1, "crop box is empty");
  require(box.x >= 0 && box.y >= 0 && box.x + box.width <= image.width &&
              box.y + box.height <= image.height,
          "crop box exceeds image bounds");
  FeatureMap out(image.channels, box.height, box.width);
  for (int c = 0; c < image.channels; ++c)
    for (int y = 0; y < box.height; ++y)
      for (int x = 0; x < box.width; ++x)
        out.at(c, y, x) = image.at(c, box.y + y, box.x + x);
  return out;
}

FeatureMap resize_bilinear(const FeatureMap& image, int width, int height) {
  if (width == image.width && height == image.height) return image;
  return bilinear_sample(image, mesh_grid(width, height));
}

double face_identity_loss(const FeatureExtractor& g, const FeatureMap& synth_target,
                          const FeatureMap& reference, const FaceBox& box) {
  require(synth_target.same_shape(reference),
          "face_identity_loss: image dimensions differ");
  const auto [in_h, in_w] = g.input_size();
  FeatureMap a = resize_bilinear(crop(synth_target, box), in_w, in_h);
  FeatureMap b = resize_bilinear(crop(reference, box), in_w, in_h);
  return layerwise_mean_l1(g, a, b);
}

double adversarial_loss_g(const FeatureMap& fake_scores, Reduction reduction) {
  return reduce_sq(fake_scores, 0.0, reduction);
}

double adversarial_loss_d(const FeatureMap& fake_scores,
                          const FeatureMap& real_scores, Reduction reduction) {
  return reduce_sq(fake_scores, 1.0, reduction) +
         reduce_sq(real_scores, -1.0, reduction);
}

double tv(const FeatureMap& single_channel) {
  require(single_channel.channels == 1, "tv expects a single-channel map");
  require(single_channel.height >= 2 && single_channel.width >= 2,
          "tv needs at least a 2x2 map");
  double acc = 0.0;
  for (int y = 0; y < single_channel.height; ++y) {
    for (int x = 0; x < single_channel.width; ++x) {
      const double v = single_channel.at(0, y, x);
      if (y >= 1) {
        const double d = v - single_channel.at(0, y - 1, x);
        acc += d * d;
      }
      if (x >= 1) {
        const double d = v - single_channel.at(0, y, x - 1);
        acc += d * d;
      }
    }
  }
  return acc;
}

double attention_reg_loss(const FeatureMap& source_attention,
                          const FeatureMap& source_silhouette,
                          const FeatureMap& target_attention,
                          const FeatureMap& target_silhouette,
                          Reduction reduction) {
  return reduce_sq_diff(source_attention, source_silhouette, reduction) +
         reduce_sq_diff(target_attention, target_silhouette, reduction) +
         tv(source_attention) + tv(target_attention);
}

double total_generator_loss(const LossWeights& weights, double perceptual,
                            double face, double attention, double adversarial) {
  return weights.lambda_p * perceptual + weights.lambda_f * face +
         weights.lambda_a * attention + adversarial;
}

namespace {

std::vector<double> to_gray(const FeatureMap& img) {
  std::vector<double> gray(static_cast<size_t>(img.height) * img.width);
  if (img.channels == 1) {
    for (size_t i = 0; i < gray.size(); ++i) gray[i] = img.data[i];
  } else {
    require(img.channels == 3, "ssim expects 1- or 3-channel images");
    const size_t plane = gray.size();
    for (size_t i = 0; i < plane; ++i)
      gray[i] = 0.299 * img.data[i] + 0.587 * img.data[plane + i] +
                0.114 * img.data[2 * plane + i];
  }
  return gray;
}

constexpr int kWin = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;  // (K1 * L)^2, L = 1
constexpr double kC2 = 0.03 * 0.03;

std::vector<double> gaussian_kernel_1d() {
  std::vector<double> k(kWin);
  double sum = 0.0;
  for (int i = 0; i < kWin; ++i) {
    const double d = i - (kWin - 1) / 2.0;
    k[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Valid-region separable Gaussian filter: output (H-10) x (W-10).
std::vector<double> filter_valid(const std::vector<double>& img, int h, int w) {
  static const std::vector<double> k = gaussian_kernel_1d();
  const int oh = h - kWin + 1, ow = w - kWin + 1;
  std::vector<double> horiz(static_cast<size_t>(h) * ow);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kWin; ++i) acc += k[i] * img[static_cast<size_t>(y) * w + x + i];
      horiz[static_cast<size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kWin; ++i) acc += k[i] * horiz[static_cast<size_t>(y + i) * ow + x];
      out[static_cast<size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double ssim(const FeatureMap& a, const FeatureMap& b) {
  require(a.same_shape(b), "ssim: image dimensions differ");
  require(a.height >= kWin && a.width >= kWin,
          "ssim needs images at least 11x11");

  const int h = a.height, w = a.width;
  std::vector<double> x = to_gray(a);
  std::vector<double> y = to_gray(b);
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }

  std::vector<double> mu_x = filter_valid(x, h, w);
  std::vector<double> mu_y = filter_valid(y, h, w);
  std::vector<double> e_xx = filter_valid(xx, h, w);
  std::vector<double> e_yy = filter_valid(yy, h, w);
  std::vector<double> e_xy = filter_valid(xy, h, w);

  double acc = 0.0;
  for (size_t i = 0; i < mu_x.size(); ++i) {
    const double mx = mu_x[i], my = mu_y[i];
    const double sx = e_xx[i] - mx * mx;
    const double sy = e_yy[i] - my * my;
    const double sxy = e_xy[i] - mx * my;
    const double num = (2.0 * mx * my + kC1) * (2.0 * sxy + kC2);
    const double den = (mx * mx + my * my + kC1) * (sx + sy + kC2);
    acc += num / den;
  }
  return acc / static_cast<double>(mu_x.size());
}

}  // namespace lw
