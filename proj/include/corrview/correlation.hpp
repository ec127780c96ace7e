#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "corrview/types.hpp"

namespace corrview {

/// Largest H'*W' admitted for dense 4D volumes.
inline constexpr int kMaxVolumePixels = 64 * 64;

/// Dense 4D correlation tensor over (p,q,r,s): source row/col, target
/// row/col. values[((p*w + q)*h + r)*w + s].
struct CorrelationVolume {
  int h = 0, w = 0;
  int layer_count = 0;     // number of aggregated cosine layers
  bool unit_range = false;  // true once mapped from [-L, L] to [0, 1]
  std::pair<int, int> pair_id{0, 0};
  std::vector<double> values;

  double& at(int p, int q, int r, int s) {
    return values[((static_cast<size_t>(p) * w + q) * h + r) * w + s];
  }
  double at(int p, int q, int r, int s) const {
    return values[((static_cast<size_t>(p) * w + q) * h + r) * w + s];
  }
  int pixels() const { return h * w; }
};

/// Argmax correspondence per source pixel with its aggregated score.
struct RawCorrespondenceField {
  int h = 0, w = 0;
  std::pair<int, int> pair_id{0, 0};
  std::vector<Pixel> target;       // row-major over source pixels
  std::vector<double> confidence;  // volume value at the argmax
};

/// Bilinearly resamples every layer to (h_out, w_out), align-corners.
FeatureStack interpolate_features(const FeatureStack& stack, int h_out, int w_out);

/// Sum over layers of per-pixel cosine similarity at the common resolution.
/// Zero-norm feature vectors score 0 against everything.
CorrelationVolume build_correlation(const FeatureStack& src, const FeatureStack& dst,
                                    int h_common, int w_common);

/// Affine map v -> (v + L) / 2L onto [0,1], L = layer count. Order preserving;
/// makes the volume non-negative for ratio filtering.
CorrelationVolume normalize_to_unit_range(const CorrelationVolume& vol);

/// Soft mutual nearest-neighbour filtering: rescales each entry by its ratio
/// to the best score over source pixels and over target pixels. Requires
/// non-negative entries.
CorrelationVolume mutual_nn_filter(const CorrelationVolume& vol);

enum class SmoothNorm {
  /// Uniform k^4 box in the interior; at boundaries the out-of-bounds tap
  /// weight stays on the center entry, so constants and the volume mean are
  /// preserved exactly.
  kMassPreserving,
  /// Mean over the in-bounds taps of the k^4 neighborhood.
  kCountMean,
  /// Zero-padded sum weighted 1/k^3.
  kUniformK3,
};

/// 4D box smoothing with odd kernel size k.
CorrelationVolume smooth_4d(const CorrelationVolume& vol, int k,
                            SmoothNorm norm = SmoothNorm::kMassPreserving);

/// Per-source-pixel argmax over targets; ties break to the smallest row-major
/// linear index.
RawCorrespondenceField extract_correspondences(const CorrelationVolume& vol);

}  // namespace corrview
