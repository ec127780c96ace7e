#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "corrview/camera.hpp"
#include "corrview/types.hpp"

namespace corrview {

enum class SdfShape { kSphere, kBox, kRoundedBox, kTorus };

SdfShape sdf_shape_from_string(const std::string& name);
std::string to_string(SdfShape shape);

/// One primitive. params by shape: sphere [r], box [hx,hy,hz],
/// rounded-box [hx,hy,hz,r], torus [major,minor]. blend is the smooth-union
/// radius used when folding this primitive into the scene (0 = hard min).
struct SdfPrimitive {
  SdfShape shape = SdfShape::kSphere;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  std::vector<double> params;
  double blend = 0.0;
};

struct SdfScene {
  std::vector<SdfPrimitive> primitives;

  double sdf(const Eigen::Vector3d& point) const;
  /// Conservative radius r with sdf(x) > 0 for ||x|| > r.
  double bounding_radius() const;
};

struct RenderOptions {
  int max_steps = 256;
  double hit_epsilon = 1e-5;
};

/// Sphere-traces every pixel. Depth is the camera-frame Z of the hit
/// (kNoHitDepth on miss); opacity is 1 for hits, 0 for misses.
std::pair<DepthMap, OpacityMap> render_depth_opacity(const SdfScene& scene, const Camera& cam,
                                                     const RenderOptions& opts = {});

/// Camera-frame Z of the second surface intersection along the pixel ray,
/// or kNoHitDepth when the ray never re-enters the scene.
float second_intersection_depth(const SdfScene& scene, const Camera& cam, const Pixel& pixel,
                                const RenderOptions& opts = {});

enum class InfidelityKind { kConcavity, kMissingSurface };

/// Corrupts a contiguous foreground blob covering ~mask_fraction of the
/// foreground. Concavity adds `magnitude` to the blob depths; missing-surface
/// replaces them with the second ray intersection. Returns the corrupted copy
/// and the blob mask.
std::pair<DepthMap, Mask> inject_infidelity(const SdfScene& scene, const Camera& cam,
                                            const DepthMap& depth, const OpacityMap& opacity,
                                            InfidelityKind kind, double mask_fraction,
                                            double magnitude, uint64_t seed);

}  // namespace corrview
