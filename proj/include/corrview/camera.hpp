#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

namespace corrview {

/// Pinhole intrinsics shared by rig construction.
struct Intrinsics {
  double fx = 0, fy = 0;
  double cx = 0, cy = 0;
  int width = 0, height = 0;

  /// Symmetric intrinsics from a horizontal field of view.
  static Intrinsics from_fov(int width, int height, double fov_deg);
};

/// Pinhole camera. rotation maps world to camera coordinates (x right,
/// y down, z forward); translation = -rotation * center.
struct Camera {
  double fx = 1, fy = 1;
  double cx = 0, cy = 0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  int width = 0, height = 0;

  Eigen::Vector3d center() const { return -rotation.transpose() * translation; }

  /// Throws on non-orthonormal rotation or non-positive focal lengths / dims.
  void validate() const;

  /// Camera at `position` looking at `target` with world-up (0,0,1).
  static Camera look_at(const Eigen::Vector3d& position, const Eigen::Vector3d& target,
                        const Intrinsics& intr);
};

/// Two interlinked orbit view sets V1, V2 with azimuth offset delta_alpha.
struct CameraRig {
  int n_views = 0;
  std::vector<Camera> cameras_v1;
  std::vector<Camera> cameras_v2;
  double delta_alpha = 0;  // degrees
  double radius = 0;
  double elevation = 0;  // degrees
};

/// Orbit camera at the given azimuth/elevation/radius looking at the origin.
Camera orbit_camera(double azimuth_deg, double elevation_deg, double radius,
                    const Intrinsics& intr);

/// Builds the two equispaced view sets. delta_alpha_deg == nullopt samples
/// uniformly from [10, 30] degrees using `seed`. First azimuth is 0.
CameraRig build_rig(int n, std::optional<double> delta_alpha_deg, double radius,
                    double elevation_deg, const Intrinsics& intr, uint64_t seed);

/// Projects a world point; returns (pixel, depth) with depth the camera-frame Z.
std::pair<Eigen::Vector2d, double> project(const Camera& cam, const Eigen::Vector3d& point);

/// Inverse of project for a given plane depth.
Eigen::Vector3d unproject(const Camera& cam, const Eigen::Vector2d& pixel, double depth);

/// Normalized epipolar line (a,b,c), a^2+b^2 = 1, in cam_dst for a pixel of cam_src.
Eigen::Vector3d epipolar_line(const Camera& cam_src, const Camera& cam_dst,
                              const Eigen::Vector2d& pixel);

/// Fundamental matrix mapping cam_src pixels to cam_dst epipolar lines.
Eigen::Matrix3d fundamental_matrix(const Camera& cam_src, const Camera& cam_dst);

/// Closest point on the line and the perpendicular distance.
std::pair<Eigen::Vector2d, double> point_to_line_projection(const Eigen::Vector3d& line,
                                                            const Eigen::Vector2d& pixel);

}  // namespace corrview
