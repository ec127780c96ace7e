#pragma once

#include <cstdint>
#include <vector>

#include "corrview/camera.hpp"
#include "corrview/sdf_scene.hpp"
#include "corrview/types.hpp"

namespace corrview {

struct FeatureLayerSpec {
  int layer_id = 0;
  int height = 0;
  int width = 0;
  int channels = 0;
};

struct FeatureSpec {
  std::vector<FeatureLayerSpec> layers;
  /// Kernel bandwidth of the position embedding in world units; smaller
  /// values make nearby surface points easier to tell apart.
  double scale = 0.15;
};

/// Position-determined feature maps: hit pixels get a seeded random-Fourier
/// embedding of their 3D surface point plus optional Gaussian noise, misses a
/// fixed per-layer background vector. Identical (spec, seed) across views, so
/// the same surface point yields the same noiseless feature everywhere.
FeatureStack synthesize_features(const SdfScene& scene, const Camera& cam, const DepthMap& depth,
                                 const FeatureSpec& spec, double noise_sigma, uint64_t seed,
                                 int view_id);

}  // namespace corrview
