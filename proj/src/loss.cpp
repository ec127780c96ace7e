#include "corrview/loss.hpp"

#include <cmath>

#include "corrview/errors.hpp"

namespace corrview {

double huber(const Eigen::Vector2d& residual, double delta) {
  if (delta <= 0) throw InvalidSpecError("huber delta must be positive");
  double rho = residual.norm();
  if (rho <= delta) return 0.5 * rho * rho;
  return delta * (rho - 0.5 * delta);
}

ReprojectionField reproject_correspondences(const DepthMap& depth_src, const Camera& cam_src,
                                            const Camera& cam_dst,
                                            const std::vector<Pixel>& pixels) {
  ReprojectionField field;
  field.h = depth_src.height;
  field.w = depth_src.width;
  field.points.resize(pixels.size(), Eigen::Vector2d::Zero());
  field.valid.assign(pixels.size(), 0);

  for (size_t i = 0; i < pixels.size(); ++i) {
    const Pixel& px = pixels[i];
    if (!depth_src.in_bounds(px.x, px.y)) continue;
    float d = depth_src.at(px.x, px.y);
    if (!is_hit(d) || !std::isfinite(d)) continue;
    try {
      Eigen::Vector3d world = unproject(cam_src, Eigen::Vector2d(px.x, px.y), d);
      auto [pixel, depth] = project(cam_dst, world);
      if (!std::isfinite(pixel.x()) || !std::isfinite(pixel.y())) continue;
      field.points[i] = pixel;
      field.valid[i] = 1;
    } catch (const BehindCameraError&) {
      // leave invalid
    }
  }
  return field;
}

LossReport corr_loss(const CorrespondenceSet& set, const ReprojectionField& corr_nerf,
                     const DepthMap& depth_src, const Camera& cam_src, const Camera& cam_dst,
                     const HuberConfig& cfg) {
  if (corr_nerf.points.size() != set.matches.size())
    throw InvalidSpecError("corr_nerf must cover every source pixel in the set");
  if (cfg.delta <= 0) throw InvalidSpecError("huber delta must be positive");

  LossReport report;
  report.grad_depth = Grid<double>(set.w, set.h, 0.0);
  report.per_match.reserve(set.matches.size());

  // Constant pieces of the reprojection ray in the destination frame.
  const Eigen::Matrix3d r_rel = cam_dst.rotation * cam_src.rotation.transpose();
  const Eigen::Vector3d offset = cam_dst.rotation * cam_src.center() + cam_dst.translation;

  for (size_t i = 0; i < set.matches.size(); ++i) {
    if (!corr_nerf.valid[i]) continue;
    const Match& m = set.matches[i];

    Eigen::Vector2d residual = m.target - corr_nerf.points[i];
    double rho = residual.norm();
    double value = huber(residual, cfg.delta);

    report.total += m.confidence * value;
    ++report.n_active;
    report.per_match.push_back(MatchTerm{m.source, residual, value, m.confidence});

    if (rho <= 1e-300) continue;  // flat at the origin of the norm

    // dpixel/ddepth of the destination projection along the source ray.
    Eigen::Vector3d dir_cam((m.source.x - cam_src.cx) / cam_src.fx,
                            (m.source.y - cam_src.cy) / cam_src.fy, 1.0);
    Eigen::Vector3d b = r_rel * dir_cam;
    double d = depth_src.at(m.source.x, m.source.y);
    Eigen::Vector3d y = b * d + offset;
    double z2 = y.z() * y.z();
    Eigen::Vector2d jac(cam_dst.fx * (b.x() * y.z() - y.x() * b.z()) / z2,
                        cam_dst.fy * (b.y() * y.z() - y.y() * b.z()) / z2);

    double scale = std::min(1.0, cfg.delta / rho);
    report.grad_depth.at(m.source.x, m.source.y) += -m.confidence * scale * residual.dot(jac);
  }

  if (cfg.reduction == LossReduction::kMeanOverMatches && report.n_active > 0) {
    report.total /= report.n_active;
    for (double& g : report.grad_depth.values) g /= report.n_active;
  }
  return report;
}

}  // namespace corrview
