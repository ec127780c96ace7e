#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "corrview/camera.hpp"
#include "corrview/correlation.hpp"
#include "corrview/types.hpp"

namespace corrview {

struct FilterConfig {
  double tau_epi = 2.0;               // pixels
  double opacity_edge_threshold = 0.99;
  int pool_kernel = 3;                // odd
};

// Provenance bits, one per filter stage a match passed.
inline constexpr uint32_t kStageSourceMask = 1u << 0;
inline constexpr uint32_t kStageTargetMask = 1u << 1;
inline constexpr uint32_t kStageEpipolar = 1u << 2;
inline constexpr uint32_t kStageBounds = 1u << 3;
inline constexpr uint32_t kAllStages =
    kStageSourceMask | kStageTargetMask | kStageEpipolar | kStageBounds;

struct Match {
  Pixel source;
  Eigen::Vector2d target = Eigen::Vector2d::Zero();  // on the epipolar line
  double confidence = 0;
  uint32_t provenance = 0;
};

struct FilterStats {
  int input = 0;
  int after_source_mask = 0;
  int after_target_mask = 0;
  int after_epipolar = 0;
  int after_bounds = 0;
};

struct CorrespondenceSet {
  std::pair<int, int> pair_id{0, 0};
  int h = 0, w = 0;
  std::vector<Match> matches;
  FilterStats stats;
};

/// Reprojections of source pixels into the partner view; valid marks entries
/// with finite, in-front-of-camera results.
struct ReprojectionField {
  int h = 0, w = 0;
  std::vector<Eigen::Vector2d> points;
  std::vector<uint8_t> valid;
};

/// Non-edge foreground: count-normalized average-pooled opacity meets the
/// threshold and the raw opacity is non-zero.
Mask foreground_mask(const OpacityMap& opacity, const FilterConfig& cfg);

/// Runs the four-stage filter pipeline: source mask, target mask, epipolar
/// threshold + projection onto the line, bounds/mask check of the foot.
CorrespondenceSet apply_filters(const RawCorrespondenceField& raw, const Camera& cam_src,
                                const Camera& cam_dst, const Mask& mask_src, const Mask& mask_dst,
                                const FilterConfig& cfg);

/// Validity mask for reprojections: finite and inside [0,w) x [0,h).
std::vector<uint8_t> reprojection_bounds_filter(const ReprojectionField& field, int h, int w);

}  // namespace corrview
