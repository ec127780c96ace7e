#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "corrview/camera.hpp"
#include "corrview/errors.hpp"

using namespace corrview;

namespace {

Camera identity_camera(double fx = 100, double cx = 64) {
  Camera cam;
  cam.fx = cam.fy = fx;
  cam.cx = cam.cy = cx;
  cam.width = cam.height = static_cast<int>(2 * cx);
  return cam;
}

double azimuth_of(const Camera& cam) {
  Eigen::Vector3d c = cam.center();
  double deg = std::atan2(c.y(), c.x()) * 180.0 / M_PI;
  return deg < -1e-9 ? deg + 360.0 : deg;
}

Intrinsics test_intrinsics() { return Intrinsics::from_fov(64, 64, 60.0); }

}  // namespace

TEST_CASE("rig azimuths are equispaced with the requested offset") {
  CameraRig rig = build_rig(4, 20.0, 2.5, 15.0, test_intrinsics(), 0);
  const double expected_v1[] = {0, 90, 180, 270};
  for (int i = 0; i < 4; ++i) {
    CHECK(azimuth_of(rig.cameras_v1[i]) == doctest::Approx(expected_v1[i]).epsilon(1e-9));
    CHECK(azimuth_of(rig.cameras_v2[i]) ==
          doctest::Approx(expected_v1[i] + 20.0).epsilon(1e-9));
  }
}

TEST_CASE("random delta_alpha samples from [10, 30] and is seed-stable") {
  CameraRig a = build_rig(4, std::nullopt, 2.5, 15.0, test_intrinsics(), 42);
  CameraRig b = build_rig(4, std::nullopt, 2.5, 15.0, test_intrinsics(), 42);
  CHECK(a.delta_alpha >= 10.0);
  CHECK(a.delta_alpha <= 30.0);
  CHECK(a.delta_alpha == b.delta_alpha);
}

TEST_CASE("rig construction rejects bad arguments") {
  CHECK_THROWS_AS(build_rig(1, 20.0, 2.5, 15.0, test_intrinsics(), 0), InvalidRigError);
  CHECK_THROWS_AS(build_rig(4, 90.0, 2.5, 15.0, test_intrinsics(), 0), OverlapViolationError);
  CHECK_THROWS_AS(build_rig(4, 20.0, -1.0, 15.0, test_intrinsics(), 0), InvalidRigError);
}

TEST_CASE("all rig rotations are orthonormal and look at the origin") {
  CameraRig rig = build_rig(6, 25.0, 3.0, 20.0, test_intrinsics(), 0);
  auto check_cam = [](const Camera& cam) {
    Eigen::Matrix3d err = cam.rotation.transpose() * cam.rotation - Eigen::Matrix3d::Identity();
    CHECK(err.cwiseAbs().maxCoeff() < 1e-9);
    // the origin projects to the principal point
    auto [pix, depth] = project(cam, Eigen::Vector3d::Zero());
    CHECK(pix.x() == doctest::Approx(cam.cx).epsilon(1e-9));
    CHECK(pix.y() == doctest::Approx(cam.cy).epsilon(1e-9));
    CHECK(depth > 0);
  };
  for (const auto& cam : rig.cameras_v1) check_cam(cam);
  for (const auto& cam : rig.cameras_v2) check_cam(cam);
}

TEST_CASE("project maps axis points through the pinhole model") {
  Camera cam = identity_camera();
  auto [pix, depth] = project(cam, {0, 0, 5});
  CHECK(pix.x() == doctest::Approx(64.0));
  CHECK(pix.y() == doctest::Approx(64.0));
  CHECK(depth == doctest::Approx(5.0));

  auto [pix2, d2] = project(cam, {1, 0, 5});
  CHECK(pix2.x() == doctest::Approx(84.0));
  CHECK(pix2.y() == doctest::Approx(64.0));

  CHECK_THROWS_AS(project(cam, {0, 0, 0}), BehindCameraError);
  CHECK_THROWS_AS(project(cam, {0, 0, -2}), BehindCameraError);
}

TEST_CASE("unproject inverts project") {
  Camera cam = identity_camera();
  Eigen::Vector3d p = unproject(cam, {64, 64}, 3.5);
  CHECK(p.isApprox(Eigen::Vector3d(0, 0, 3.5), 1e-12));
  CHECK_THROWS_AS(unproject(cam, {10, 10}, -1.0), InvalidDepthError);
}

TEST_CASE("project/unproject round trip over random orbit cameras") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> az(0, 360), el(-60, 60), px(0, 63);
  std::uniform_real_distribution<double> depth_dist(0.1, 100.0);
  for (int i = 0; i < 200; ++i) {
    Camera cam = orbit_camera(az(rng), el(rng), 2.5, test_intrinsics());
    Eigen::Vector2d pixel(px(rng), px(rng));
    double depth = depth_dist(rng);
    auto [pix2, d2] = project(cam, unproject(cam, pixel, depth));
    CHECK((pix2 - pixel).norm() < 1e-6);
    CHECK(std::abs(d2 - depth) < 1e-6 * depth);
  }
}

TEST_CASE("rectified pair yields horizontal epipolar lines") {
  Camera a = identity_camera();
  Camera b = identity_camera();
  b.translation = Eigen::Vector3d(-1, 0, 0);  // center at (1,0,0), same orientation
  Eigen::Vector3d line = epipolar_line(a, b, {40.0, 51.0});
  CHECK(std::abs(line.x()) < 1e-9);
  CHECK(std::abs(line.y() * 51.0 + line.z()) < 1e-9);
}

TEST_CASE("epipolar consistency against the projection oracle") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> az(0, 360), el(-45, 45), px(2, 61);
  std::uniform_real_distribution<double> depth_dist(0.5, 20.0);
  for (int i = 0; i < 200; ++i) {
    Camera a = orbit_camera(az(rng), el(rng), 2.5, test_intrinsics());
    Camera b = orbit_camera(az(rng), el(rng), 3.0, test_intrinsics());
    Eigen::Vector2d pixel(px(rng), px(rng));
    Eigen::Vector3d line = epipolar_line(a, b, pixel);
    CHECK(std::abs(std::hypot(line.x(), line.y()) - 1.0) < 1e-12);
    for (int j = 0; j < 5; ++j) {
      double d = depth_dist(rng);
      Eigen::Vector3d world = unproject(a, pixel, d);
      try {
        auto [proj, depth] = project(b, world);
        double dist = std::abs(line.x() * proj.x() + line.y() * proj.y() + line.z());
        CHECK(dist < 1e-6);
      } catch (const BehindCameraError&) {
        // point behind the second camera; nothing to check
      }
    }
  }
}

TEST_CASE("coincident cameras are a degenerate epipolar setup") {
  Camera cam = orbit_camera(30.0, 15.0, 2.5, test_intrinsics());
  CHECK_THROWS_AS(epipolar_line(cam, cam, {10.0, 10.0}), DegenerateEpipolarError);
}

TEST_CASE("point-line projection basics") {
  Eigen::Vector3d row3(0, 1, -3);  // y = 3
  auto [foot, dist] = point_to_line_projection(row3, {5, 7});
  CHECK(foot.x() == doctest::Approx(5.0));
  CHECK(foot.y() == doctest::Approx(3.0));
  CHECK(dist == doctest::Approx(4.0));

  auto [foot2, dist2] = point_to_line_projection(row3, {2, 3});
  CHECK(dist2 == doctest::Approx(0.0));
  CHECK((foot2 - Eigen::Vector2d(2, 3)).norm() < 1e-12);
}

TEST_CASE("line foot minimizes distance among sampled line points") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> coord(-10, 10), angle(0, 2 * M_PI);
  for (int i = 0; i < 50; ++i) {
    double theta = angle(rng);
    Eigen::Vector3d line(std::cos(theta), std::sin(theta), coord(rng));
    Eigen::Vector2d pixel(coord(rng), coord(rng));
    auto [foot, dist] = point_to_line_projection(line, pixel);
    CHECK(std::abs(line.x() * foot.x() + line.y() * foot.y() + line.z()) < 1e-9);

    Eigen::Vector2d dir(-line.y(), line.x());
    double best = 1e30;
    for (int s = -2000; s <= 2000; ++s) {
      Eigen::Vector2d q = foot + dir * (s * 0.01);
      best = std::min(best, (q - pixel).norm());
    }
    CHECK(dist <= best + 1e-4);
    CHECK((foot - pixel).norm() == doctest::Approx(dist).epsilon(1e-9));
  }
}

TEST_CASE("rotating all rig azimuths preserves relative poses") {
  Intrinsics intr = test_intrinsics();
  const double shift = 37.0;
  for (double az = 0; az < 360; az += 90) {
    Camera a1 = orbit_camera(az, 15.0, 2.5, intr);
    Camera b1 = orbit_camera(az + 20.0, 15.0, 2.5, intr);
    Camera a2 = orbit_camera(az + shift, 15.0, 2.5, intr);
    Camera b2 = orbit_camera(az + shift + 20.0, 15.0, 2.5, intr);

    Eigen::Matrix3d rel1 = b1.rotation * a1.rotation.transpose();
    Eigen::Matrix3d rel2 = b2.rotation * a2.rotation.transpose();
    CHECK((rel1 - rel2).cwiseAbs().maxCoeff() < 1e-9);

    Eigen::Vector3d t1 = b1.rotation * (a1.center() - b1.center());
    Eigen::Vector3d t2 = b2.rotation * (a2.center() - b2.center());
    CHECK((t1 - t2).cwiseAbs().maxCoeff() < 1e-9);
  }
}
