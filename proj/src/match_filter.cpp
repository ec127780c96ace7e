#include "corrview/match_filter.hpp"

#include <cmath>

#include "corrview/errors.hpp"

namespace corrview {

Mask foreground_mask(const OpacityMap& opacity, const FilterConfig& cfg) {
  if (cfg.pool_kernel < 1 || cfg.pool_kernel % 2 == 0)
    throw InvalidKernelError("pool_kernel must be odd and >= 1");
  const int hk = cfg.pool_kernel / 2;
  Mask mask(opacity.width, opacity.height, 0);
  for (int y = 0; y < opacity.height; ++y) {
    for (int x = 0; x < opacity.width; ++x) {
      if (opacity.at(x, y) == 0.0f) continue;
      double sum = 0;
      int count = 0;
      for (int dy = -hk; dy <= hk; ++dy)
        for (int dx = -hk; dx <= hk; ++dx) {
          int nx = x + dx, ny = y + dy;
          if (!opacity.in_bounds(nx, ny)) continue;
          sum += opacity.at(nx, ny);
          ++count;
        }
      if (sum / count >= cfg.opacity_edge_threshold) mask.at(x, y) = 1;
    }
  }
  return mask;
}

CorrespondenceSet apply_filters(const RawCorrespondenceField& raw, const Camera& cam_src,
                                const Camera& cam_dst, const Mask& mask_src, const Mask& mask_dst,
                                const FilterConfig& cfg) {
  if (mask_src.width != raw.w || mask_src.height != raw.h || mask_dst.width != raw.w ||
      mask_dst.height != raw.h)
    throw InvalidSpecError("mask dims must match the correspondence field");

  CorrespondenceSet set;
  set.pair_id = raw.pair_id;
  set.h = raw.h;
  set.w = raw.w;
  set.stats.input = static_cast<int>(raw.target.size());

  const Eigen::Matrix3d fmat = fundamental_matrix(cam_src, cam_dst);

  for (int sp = 0; sp < static_cast<int>(raw.target.size()); ++sp) {
    const int sx = sp % raw.w, sy = sp / raw.w;
    if (!mask_src.at(sx, sy)) continue;
    ++set.stats.after_source_mask;

    const Pixel tgt = raw.target[sp];
    if (!mask_dst.in_bounds(tgt.x, tgt.y) || !mask_dst.at(tgt.x, tgt.y)) continue;
    ++set.stats.after_target_mask;

    Eigen::Vector3d line = fmat * Eigen::Vector3d(sx, sy, 1.0);
    double n = std::hypot(line.x(), line.y());
    if (n < 1e-15) continue;  // source pixel at the epipole
    line /= n;
    auto [foot, dist] = point_to_line_projection(line, Eigen::Vector2d(tgt.x, tgt.y));
    if (dist > cfg.tau_epi) continue;
    ++set.stats.after_epipolar;

    if (!(foot.x() >= 0 && foot.x() < raw.w && foot.y() >= 0 && foot.y() < raw.h) ||
        !std::isfinite(foot.x()) || !std::isfinite(foot.y()))
      continue;
    int fx = std::min(static_cast<int>(std::lround(foot.x())), raw.w - 1);
    int fy = std::min(static_cast<int>(std::lround(foot.y())), raw.h - 1);
    if (!mask_dst.at(fx, fy)) continue;
    ++set.stats.after_bounds;

    Match m;
    m.source = Pixel{sx, sy};
    m.target = foot;
    m.confidence = raw.confidence[sp];
    m.provenance = kAllStages;
    set.matches.push_back(m);
  }
  return set;
}

std::vector<uint8_t> reprojection_bounds_filter(const ReprojectionField& field, int h, int w) {
  std::vector<uint8_t> valid(field.points.size(), 0);
  for (size_t i = 0; i < field.points.size(); ++i) {
    if (!field.valid.empty() && !field.valid[i]) continue;
    const auto& p = field.points[i];
    if (!std::isfinite(p.x()) || !std::isfinite(p.y())) continue;
    if (p.x() >= 0 && p.x() < w && p.y() >= 0 && p.y() < h) valid[i] = 1;
  }
  return valid;
}

}  // namespace corrview
