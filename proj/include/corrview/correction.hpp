#pragma once

#include <string>
#include <vector>

#include "corrview/config.hpp"
#include "corrview/schedule.hpp"
#include "corrview/sdf_scene.hpp"
#include "corrview/types.hpp"

namespace corrview {

struct IterationRecord {
  int iter = 0;
  Mode mode = Mode::kSds;
  double corr_loss = 0;  // NaN on SDS iterations
  int n_matches = 0;
  double made_corrupted = 0;  // mean |depth - gt| on corrupted pixels
  double clean_drift = 0;     // mean |depth - gt| on clean foreground pixels
  double delta_alpha = 0;     // degrees used this iteration (NaN on SDS)
};

/// Per-source-pixel |corr_diff - corr_NeRF| captured at a checkpoint.
struct ResidualSnapshot {
  int iter = 0;
  std::string src_name, dst_name;
  Grid<float> disparity;
};

struct CorrectionTrace {
  std::vector<IterationRecord> iterations;
  std::vector<ResidualSnapshot> snapshots;
  std::vector<std::string> view_names;
  std::vector<DepthMap> initial_depths, final_depths, gt_depths;
  double made_initial = 0, made_final = 0;
  double clean_drift_final = 0;
  int corrupted_pixel_count = 0;
};

/// Percentage drop of the mean absolute depth error on corrupted pixels.
double made_reduction_percent(const CorrectionTrace& trace);

/// The alternating depth-correction loop. State is the 2N given depth maps at
/// the rig cameras; on CORR iterations every view is updated once as the
/// source of a directed adjacent-pair evaluation (its natural partner under a
/// fixed delta-alpha policy, a freshly rendered offset view when resampling).
/// SDS iterations apply the pluggable prior (pull toward the initial maps,
/// weight lambda_sds_proxy; zero weight = no-op).
/// Throws StalledCorrectionError after 50 consecutive CORR iterations without
/// a single surviving match.
CorrectionTrace run_depth_correction(const SdfScene& scene, const CameraRig& rig,
                                     std::vector<DepthMap> corrupted_v1,
                                     std::vector<DepthMap> corrupted_v2,
                                     const ExperimentConfig& cfg);

/// Renders the rig, injects the configured infidelity and runs the loop.
CorrectionTrace run_experiment(const ExperimentConfig& cfg);

/// Writes metrics JSON, checkpoint disparity heatmaps (16-bit PGM) and
/// before/after/ground-truth depth PFMs into `dir`.
void emit_trace(const CorrectionTrace& trace, const std::string& dir, double heatmap_clip);

}  // namespace corrview
