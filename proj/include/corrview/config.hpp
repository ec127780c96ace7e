#pragma once

#include <optional>
#include <string>
#include <vector>

#include "corrview/correlation.hpp"
#include "corrview/features.hpp"
#include "corrview/loss.hpp"
#include "corrview/match_filter.hpp"
#include "corrview/schedule.hpp"
#include "corrview/sdf_scene.hpp"

namespace corrview {

struct RigConfig {
  int n = 4;
  std::optional<double> delta_alpha;  // nullopt = sample uniformly from [10,30]
  double radius = 2.5;
  double elevation = 15.0;
  int width = 32, height = 32;
  double fov_deg = 60.0;
  uint64_t seed = 0;

  Intrinsics intrinsics() const { return Intrinsics::from_fov(width, height, fov_deg); }
};

struct InfidelityConfig {
  InfidelityKind kind = InfidelityKind::kConcavity;
  double mask_fraction = 0.15;
  double magnitude = 0.3;
  uint64_t seed = 0;
  std::string views = "v1";  // "v1" | "v2" | "both"
};

/// Per-CORR-iteration azimuth offset: a fixed angle or fresh uniform samples.
struct DeltaAlphaPolicy {
  bool resample = false;
  double fixed_deg = 20.0;
  double lo = 10.0, hi = 30.0;

  static DeltaAlphaPolicy parse(const std::string& text);  // "fixed:20" | "uniform:10:30"
  std::string to_string() const;
};

struct CorrectionSettings {
  double learning_rate = 0.01;
  double lambda_corr = 1.0;
  double lambda_sds_proxy = 0.0;
  int smoothing_kernel = 3;
  SmoothNorm smooth_norm = SmoothNorm::kMassPreserving;
  double noise_sigma = 0.0;
  uint64_t seed = 0;
  DeltaAlphaPolicy delta_alpha;
};

struct FeatureConfig {
  int h = 32, w = 32;  // common correlation resolution H' x W'
  FeatureSpec spec;

  FeatureConfig() {
    spec.layers = {{6, 32, 32, 48}, {9, 16, 16, 32}};
    spec.scale = 0.15;
  }
};

struct OutputConfig {
  std::string dir;
  std::vector<int> checkpoints;  // iteration indices; empty = {0, T-1}
  double heatmap_clip = 8.0;     // pixels mapped to full heatmap intensity
};

struct ExperimentConfig {
  SdfScene scene;
  RigConfig rig;
  InfidelityConfig infidelity;
  FeatureConfig features;
  FilterConfig filter;
  HuberConfig huber;
  Schedule schedule{600, 100, 500};
  CorrectionSettings correction;
  OutputConfig output;
};

/// Parses and schema-validates the experiment JSON. Unknown keys are
/// rejected with the offending key named.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

/// Scene-description JSON: {"primitives":[{shape, center, params, blend}]}.
SdfScene parse_scene_json(const std::string& json_text);

}  // namespace corrview
