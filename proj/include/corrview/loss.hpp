#pragma once

#include <Eigen/Dense>
#include <vector>

#include "corrview/camera.hpp"
#include "corrview/match_filter.hpp"
#include "corrview/types.hpp"

namespace corrview {

enum class LossReduction { kSum, kMeanOverMatches };

struct HuberConfig {
  double delta = 1.0;  // pixels
  LossReduction reduction = LossReduction::kSum;
};

/// Huber penalty of the Euclidean norm of a 2D pixel residual.
double huber(const Eigen::Vector2d& residual, double delta);

/// corr_NeRF: unproject each listed source pixel with its depth and project
/// into the partner camera. Entries with sentinel/non-finite depth or
/// behind-camera results are flagged invalid rather than throwing.
ReprojectionField reproject_correspondences(const DepthMap& depth_src, const Camera& cam_src,
                                            const Camera& cam_dst, const std::vector<Pixel>& pixels);

struct MatchTerm {
  Pixel source;
  Eigen::Vector2d residual = Eigen::Vector2d::Zero();  // corr_diff - corr_NeRF, pixels
  double huber_value = 0;
  double weight = 0;
};

struct LossReport {
  double total = 0;
  int n_active = 0;
  std::vector<MatchTerm> per_match;
  Grid<double> grad_depth;  // dL/d(source depth), zero where no active match
};

/// Confidence-weighted Huber loss over the surviving matches with the
/// analytic depth gradient (chain rule through unproject/project). Matches
/// with invalid reprojection contribute nothing.
LossReport corr_loss(const CorrespondenceSet& set, const ReprojectionField& corr_nerf,
                     const DepthMap& depth_src, const Camera& cam_src, const Camera& cam_dst,
                     const HuberConfig& cfg);

}  // namespace corrview
