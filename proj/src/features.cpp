#include "corrview/features.hpp"

#include <cmath>
#include <random>

#include "corrview/errors.hpp"

namespace corrview {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct FourierBasis {
  std::vector<Eigen::Vector3d> frequencies;  // one per channel
  std::vector<double> phases;
  std::vector<float> background;  // constant unit vector for miss pixels

  FourierBasis(int channels, double scale, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    frequencies.reserve(channels);
    phases.reserve(channels);
    for (int c = 0; c < channels; ++c) {
      frequencies.emplace_back(gauss(rng) / scale, gauss(rng) / scale, gauss(rng) / scale);
      phases.push_back(phase(rng));
    }
    Eigen::VectorXd bg(channels);
    for (int c = 0; c < channels; ++c) bg[c] = gauss(rng);
    bg.normalize();
    background.resize(channels);
    for (int c = 0; c < channels; ++c) background[c] = static_cast<float>(bg[c]);
  }

  void embed(const Eigen::Vector3d& point, float* out) const {
    const int channels = static_cast<int>(frequencies.size());
    const double amp = std::sqrt(2.0 / channels);
    for (int c = 0; c < channels; ++c)
      out[c] = static_cast<float>(amp * std::cos(frequencies[c].dot(point) + phases[c]));
  }
};

}  // namespace

FeatureStack synthesize_features(const SdfScene& scene, const Camera& cam, const DepthMap& depth,
                                 const FeatureSpec& spec, double noise_sigma, uint64_t seed,
                                 int view_id) {
  (void)scene;  // surface points come from the rendered depth
  if (noise_sigma < 0) throw InvalidSpecError("noise_sigma must be non-negative");
  FeatureStack stack;
  stack.view_id = view_id;
  stack.layers.reserve(spec.layers.size());

  for (const auto& layer_spec : spec.layers) {
    if (layer_spec.height < 1 || layer_spec.width < 1 || layer_spec.channels < 1)
      throw InvalidSpecError("layer dims and channels must be >= 1");
    if (layer_spec.height > depth.height || layer_spec.width > depth.width)
      throw InvalidSpecError("layer dims exceed the depth map dims");

    FourierBasis basis(layer_spec.channels, spec.scale, mix_seed(seed, layer_spec.layer_id));
    std::mt19937_64 noise_rng(mix_seed(mix_seed(seed, 0x6E6F6973ULL + view_id), layer_spec.layer_id));
    std::normal_distribution<double> noise(0.0, noise_sigma);

    FeatureLayer layer;
    layer.layer_id = layer_spec.layer_id;
    layer.height = layer_spec.height;
    layer.width = layer_spec.width;
    layer.channels = layer_spec.channels;
    layer.values.resize(static_cast<size_t>(layer.height) * layer.width * layer.channels);

    // Align-corners subsampling of the full-resolution pixel grid.
    auto src_index = [](int i, int n_out, int n_in) {
      if (n_out == 1) return 0;
      return static_cast<int>(std::lround(static_cast<double>(i) * (n_in - 1) / (n_out - 1)));
    };

    for (int y = 0; y < layer.height; ++y) {
      int sy = src_index(y, layer.height, depth.height);
      for (int x = 0; x < layer.width; ++x) {
        int sx = src_index(x, layer.width, depth.width);
        float* out = layer.pixel(x, y);
        float d = depth.at(sx, sy);
        if (is_hit(d)) {
          Eigen::Vector3d point = unproject(cam, Eigen::Vector2d(sx, sy), d);
          basis.embed(point, out);
          if (noise_sigma > 0)
            for (int c = 0; c < layer.channels; ++c) out[c] += static_cast<float>(noise(noise_rng));
        } else {
          for (int c = 0; c < layer.channels; ++c) out[c] = basis.background[c];
        }
      }
    }
    stack.layers.push_back(std::move(layer));
  }
  return stack;
}

}  // namespace corrview
