#include "corrview/camera.hpp"

#include <cmath>
#include <random>

#include "corrview/errors.hpp"

namespace corrview {

namespace {
constexpr double kPi = 3.14159265358979323846;
double deg2rad(double d) { return d * kPi / 180.0; }
}  // namespace

Intrinsics Intrinsics::from_fov(int width, int height, double fov_deg) {
  Intrinsics intr;
  intr.width = width;
  intr.height = height;
  intr.fx = intr.fy = (width / 2.0) / std::tan(deg2rad(fov_deg) / 2.0);
  intr.cx = width / 2.0;
  intr.cy = height / 2.0;
  return intr;
}

void Camera::validate() const {
  if (fx <= 0 || fy <= 0) throw InvalidRigError("focal lengths must be positive");
  if (width < 1 || height < 1) throw InvalidRigError("image dims must be >= 1");
  Eigen::Matrix3d err = rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
  if (err.cwiseAbs().maxCoeff() > 1e-9) throw InvalidRigError("rotation is not orthonormal");
}

Camera Camera::look_at(const Eigen::Vector3d& position, const Eigen::Vector3d& target,
                       const Intrinsics& intr) {
  const Eigen::Vector3d world_up(0, 0, 1);
  Eigen::Vector3d forward = (target - position).normalized();
  Eigen::Vector3d right = forward.cross(world_up);
  double n = right.norm();
  if (n < 1e-12) throw InvalidRigError("look direction parallel to world up");
  right /= n;
  Eigen::Vector3d down = forward.cross(right);  // completes the x-right, y-down, z-forward frame

  Camera cam;
  cam.fx = intr.fx;
  cam.fy = intr.fy;
  cam.cx = intr.cx;
  cam.cy = intr.cy;
  cam.width = intr.width;
  cam.height = intr.height;
  cam.rotation.row(0) = right;
  cam.rotation.row(1) = down;
  cam.rotation.row(2) = forward;
  cam.translation = -cam.rotation * position;
  return cam;
}

Camera orbit_camera(double azimuth_deg, double elevation_deg, double radius,
                    const Intrinsics& intr) {
  double az = deg2rad(azimuth_deg);
  double el = deg2rad(elevation_deg);
  Eigen::Vector3d pos(radius * std::cos(el) * std::cos(az),
                      radius * std::cos(el) * std::sin(az),
                      radius * std::sin(el));
  return Camera::look_at(pos, Eigen::Vector3d::Zero(), intr);
}

CameraRig build_rig(int n, std::optional<double> delta_alpha_deg, double radius,
                    double elevation_deg, const Intrinsics& intr, uint64_t seed) {
  if (n < 2) throw InvalidRigError("rig needs at least 2 views");
  if (radius <= 0) throw InvalidRigError("orbit radius must be positive");

  double delta;
  if (delta_alpha_deg.has_value()) {
    delta = *delta_alpha_deg;
  } else {
    std::mt19937_64 rng(seed);
    delta = std::uniform_real_distribution<double>(10.0, 30.0)(rng);
  }
  double spacing = 360.0 / n;
  if (delta <= 0 || delta >= spacing)
    throw OverlapViolationError("delta_alpha must lie in (0, 360/n) degrees");

  CameraRig rig;
  rig.n_views = n;
  rig.delta_alpha = delta;
  rig.radius = radius;
  rig.elevation = elevation_deg;
  rig.cameras_v1.reserve(n);
  rig.cameras_v2.reserve(n);
  for (int i = 0; i < n; ++i) {
    double alpha = i * spacing;
    rig.cameras_v1.push_back(orbit_camera(alpha, elevation_deg, radius, intr));
    rig.cameras_v2.push_back(orbit_camera(alpha + delta, elevation_deg, radius, intr));
  }
  return rig;
}

std::pair<Eigen::Vector2d, double> project(const Camera& cam, const Eigen::Vector3d& point) {
  Eigen::Vector3d pc = cam.rotation * point + cam.translation;
  if (pc.z() <= 1e-9) throw BehindCameraError("point has non-positive camera depth");
  Eigen::Vector2d pixel(cam.fx * pc.x() / pc.z() + cam.cx,
                        cam.fy * pc.y() / pc.z() + cam.cy);
  return {pixel, pc.z()};
}

Eigen::Vector3d unproject(const Camera& cam, const Eigen::Vector2d& pixel, double depth) {
  if (depth <= 0) throw InvalidDepthError("depth must be positive");
  Eigen::Vector3d pc((pixel.x() - cam.cx) / cam.fx * depth,
                     (pixel.y() - cam.cy) / cam.fy * depth,
                     depth);
  return cam.rotation.transpose() * (pc - cam.translation);
}

Eigen::Matrix3d fundamental_matrix(const Camera& cam_src, const Camera& cam_dst) {
  Eigen::Vector3d c_src = cam_src.center();
  Eigen::Vector3d c_dst = cam_dst.center();
  if ((c_src - c_dst).norm() < 1e-12)
    throw DegenerateEpipolarError("camera centers coincide");

  Eigen::Matrix3d r_rel = cam_dst.rotation * cam_src.rotation.transpose();
  Eigen::Vector3d t_rel = cam_dst.rotation * (c_src - c_dst);

  Eigen::Matrix3d t_cross;
  t_cross << 0, -t_rel.z(), t_rel.y(),
      t_rel.z(), 0, -t_rel.x(),
      -t_rel.y(), t_rel.x(), 0;
  Eigen::Matrix3d essential = t_cross * r_rel;

  Eigen::Matrix3d k_src, k_dst;
  k_src << cam_src.fx, 0, cam_src.cx, 0, cam_src.fy, cam_src.cy, 0, 0, 1;
  k_dst << cam_dst.fx, 0, cam_dst.cx, 0, cam_dst.fy, cam_dst.cy, 0, 0, 1;
  return k_dst.transpose().inverse() * essential * k_src.inverse();
}

Eigen::Vector3d epipolar_line(const Camera& cam_src, const Camera& cam_dst,
                              const Eigen::Vector2d& pixel) {
  Eigen::Matrix3d f = fundamental_matrix(cam_src, cam_dst);
  Eigen::Vector3d line = f * Eigen::Vector3d(pixel.x(), pixel.y(), 1.0);
  double n = std::hypot(line.x(), line.y());
  if (n < 1e-15) throw DegenerateEpipolarError("pixel maps to a degenerate epipolar line");
  return line / n;
}

std::pair<Eigen::Vector2d, double> point_to_line_projection(const Eigen::Vector3d& line,
                                                            const Eigen::Vector2d& pixel) {
  double signed_dist = line.x() * pixel.x() + line.y() * pixel.y() + line.z();
  Eigen::Vector2d foot(pixel.x() - line.x() * signed_dist,
                       pixel.y() - line.y() * signed_dist);
  return {foot, std::abs(signed_dist)};
}

}  // namespace corrview
