#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "corrview/errors.hpp"
#include "corrview/features.hpp"
#include "corrview/sdf_scene.hpp"

using namespace corrview;

namespace {

SdfScene unit_sphere() {
  SdfScene scene;
  scene.primitives.push_back({SdfShape::kSphere, {0, 0, 0}, {1.0}, 0.0});
  return scene;
}

SdfScene sphere_box() {
  SdfScene scene = unit_sphere();
  scene.primitives.push_back({SdfShape::kBox, {0.8, 0.6, -0.2}, {0.45, 0.35, 0.3}, 0.1});
  return scene;
}

Intrinsics intr32() { return Intrinsics::from_fov(32, 32, 60.0); }

/// Larger roots of |o + t*d|^2 = r^2 for a unit direction d.
std::pair<double, double> sphere_ray_roots(const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                                           double r) {
  double b = o.dot(d);
  double c = o.squaredNorm() - r * r;
  double disc = b * b - c;
  REQUIRE(disc > 0);
  return {-b - std::sqrt(disc), -b + std::sqrt(disc)};
}

}  // namespace

TEST_CASE("axis ray depth is camera distance minus radius") {
  Camera cam = Camera::look_at({3, 0, 0}, {0, 0, 0}, intr32());
  auto [depth, opacity] = render_depth_opacity(unit_sphere(), cam);
  CHECK(depth.at(16, 16) == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(opacity.at(16, 16) == 1.0f);

  CHECK(depth.at(0, 0) == kNoHitDepth);
  CHECK(opacity.at(0, 0) == 0.0f);
}

TEST_CASE("hit points satisfy the SDF equation") {
  SdfScene scene = sphere_box();
  Camera cam = orbit_camera(40.0, 15.0, 2.5, intr32());
  auto [depth, opacity] = render_depth_opacity(scene, cam);
  int hits = 0;
  for (int y = 0; y < depth.height; ++y)
    for (int x = 0; x < depth.width; ++x) {
      if (!is_hit(depth.at(x, y))) continue;
      ++hits;
      Eigen::Vector3d p = unproject(cam, {double(x), double(y)}, depth.at(x, y));
      CHECK(std::abs(scene.sdf(p)) < 1e-4);
    }
  CHECK(hits > 100);
}

TEST_CASE("camera inside the scene bound is rejected") {
  Camera cam = Camera::look_at({0.5, 0.2, 0.1}, {0, 0, 0}, intr32());
  CHECK_THROWS_AS(render_depth_opacity(unit_sphere(), cam), InsideSceneError);
}

TEST_CASE("depth is continuous across a smooth face") {
  Camera cam = Camera::look_at({2.5, 0, 0}, {0, 0, 0}, intr32());
  auto [depth, opacity] = render_depth_opacity(unit_sphere(), cam);

  // projected sphere radius in pixels; stay inside ~0.8 of it
  double fx = intr32().fx;
  double proj_radius = fx * std::tan(std::asin(1.0 / 2.5));
  double footprint = 2.5 / fx;           // generous pixel footprint bound
  double slope_bound = 1.7;              // surface slope at 0.85 of the radius
  double bound = 2.0 * footprint * slope_bound;

  std::vector<double> diffs;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x + 1 < 32; ++x) {
      auto inside = [&](int px, int py) {
        return std::hypot(px - 16.0, py - 16.0) < 0.8 * proj_radius;
      };
      if (!inside(x, y) || !inside(x + 1, y)) continue;
      if (!is_hit(depth.at(x, y)) || !is_hit(depth.at(x + 1, y))) continue;
      diffs.push_back(std::abs(depth.at(x, y) - depth.at(x + 1, y)));
    }
  REQUIRE(diffs.size() > 50);
  std::sort(diffs.begin(), diffs.end());
  CHECK(diffs[static_cast<size_t>(diffs.size() * 0.99)] < bound);
}

TEST_CASE("feature maps are deterministic and share the background vector") {
  SdfScene scene = unit_sphere();
  Camera cam_a = orbit_camera(0.0, 15.0, 2.5, intr32());
  Camera cam_b = orbit_camera(20.0, 15.0, 2.5, intr32());
  auto [d_a, o_a] = render_depth_opacity(scene, cam_a);
  auto [d_b, o_b] = render_depth_opacity(scene, cam_b);

  FeatureSpec spec;
  spec.layers = {{6, 32, 32, 24}, {9, 16, 16, 12}};
  spec.scale = 0.1;

  FeatureStack fa1 = synthesize_features(scene, cam_a, d_a, spec, 0.0, 7, 0);
  FeatureStack fa2 = synthesize_features(scene, cam_a, d_a, spec, 0.0, 7, 0);
  CHECK(fa1.layers[0].values == fa2.layers[0].values);
  CHECK(fa1.layers[1].values == fa2.layers[1].values);

  FeatureStack fb = synthesize_features(scene, cam_b, d_b, spec, 0.0, 7, 1);
  // background vectors are identical across views
  REQUIRE(!is_hit(d_a.at(0, 0)));
  REQUIRE(!is_hit(d_b.at(0, 0)));
  for (int c = 0; c < 24; ++c) CHECK(fa1.layers[0].pixel(0, 0)[c] == fb.layers[0].pixel(0, 0)[c]);
}

TEST_CASE("corresponding surface points give near-identical noiseless features") {
  SdfScene scene = unit_sphere();
  Camera cam_a = orbit_camera(0.0, 15.0, 2.5, intr32());
  Camera cam_b = orbit_camera(20.0, 15.0, 2.5, intr32());
  auto [d_a, o_a] = render_depth_opacity(scene, cam_a);
  auto [d_b, o_b] = render_depth_opacity(scene, cam_b);

  FeatureSpec spec;
  spec.layers = {{6, 32, 32, 32}};
  spec.scale = 0.1;
  FeatureStack fa = synthesize_features(scene, cam_a, d_a, spec, 0.0, 7, 0);
  FeatureStack fb = synthesize_features(scene, cam_b, d_b, spec, 0.0, 7, 1);

  // walk the target ray through a source surface point: features of the two
  // nearest-to-identical surface samples should be close to parallel
  int checked = 0;
  for (int y = 10; y < 22; ++y)
    for (int x = 10; x < 22; ++x) {
      if (!is_hit(d_a.at(x, y))) continue;
      Eigen::Vector3d p = unproject(cam_a, {double(x), double(y)}, d_a.at(x, y));
      Eigen::Vector2d q;
      double qd;
      try {
        std::tie(q, qd) = project(cam_b, p);
      } catch (const BehindCameraError&) {
        continue;
      }
      int qx = static_cast<int>(std::lround(q.x())), qy = static_cast<int>(std::lround(q.y()));
      if (!d_b.in_bounds(qx, qy) || !is_hit(d_b.at(qx, qy))) continue;
      if (std::abs(d_b.at(qx, qy) - qd) > 0.02) continue;  // occluded or grazing

      Eigen::Map<const Eigen::VectorXf> va(fa.layers[0].pixel(x, y), 32);
      Eigen::Map<const Eigen::VectorXf> vb(fb.layers[0].pixel(qx, qy), 32);
      double cos_sim = va.cast<double>().normalized().dot(vb.cast<double>().normalized());
      CHECK(cos_sim > 0.9);
      ++checked;
    }
  CHECK(checked > 20);
}

TEST_CASE("noise changes features per view but keeps determinism") {
  SdfScene scene = unit_sphere();
  Camera cam = orbit_camera(0.0, 15.0, 2.5, intr32());
  auto [depth, opacity] = render_depth_opacity(scene, cam);
  FeatureSpec spec;
  spec.layers = {{6, 16, 16, 8}};
  FeatureStack clean = synthesize_features(scene, cam, depth, spec, 0.0, 7, 0);
  FeatureStack noisy1 = synthesize_features(scene, cam, depth, spec, 0.1, 7, 0);
  FeatureStack noisy2 = synthesize_features(scene, cam, depth, spec, 0.1, 7, 0);
  CHECK(noisy1.layers[0].values == noisy2.layers[0].values);
  CHECK(noisy1.layers[0].values != clean.layers[0].values);
}

TEST_CASE("layer dims exceeding the depth map are rejected") {
  SdfScene scene = unit_sphere();
  Camera cam = orbit_camera(0.0, 15.0, 2.5, intr32());
  auto [depth, opacity] = render_depth_opacity(scene, cam);
  FeatureSpec spec;
  spec.layers = {{6, 64, 64, 8}};
  CHECK_THROWS_AS(synthesize_features(scene, cam, depth, spec, 0.0, 7, 0), InvalidSpecError);
}

TEST_CASE("concavity shifts exactly the blob pixels") {
  SdfScene scene = unit_sphere();
  Camera cam = orbit_camera(10.0, 15.0, 2.5, intr32());
  auto [depth, opacity] = render_depth_opacity(scene, cam);
  auto [bad, blob] = inject_infidelity(scene, cam, depth, opacity, InfidelityKind::kConcavity,
                                       0.15, 0.3, 21);
  int changed = 0, blob_px = 0;
  for (size_t i = 0; i < depth.size(); ++i) {
    if (blob.values[i]) {
      ++blob_px;
      CHECK(bad.values[i] == depth.values[i] + 0.3f);
    } else {
      CHECK(bad.values[i] == depth.values[i]);  // locality, bit-identical
    }
    changed += bad.values[i] != depth.values[i];
  }
  CHECK(blob_px == changed);
  int foreground = 0;
  for (float v : opacity.values) foreground += v > 0.5f;
  CHECK(blob_px >= static_cast<int>(0.15 * foreground));
  CHECK(blob_px <= static_cast<int>(0.25 * foreground));
}

TEST_CASE("mask_fraction of one covers the whole foreground") {
  SdfScene scene = unit_sphere();
  Camera cam = orbit_camera(10.0, 15.0, 2.5, intr32());
  auto [depth, opacity] = render_depth_opacity(scene, cam);
  auto [bad, blob] = inject_infidelity(scene, cam, depth, opacity, InfidelityKind::kConcavity,
                                       1.0, 0.25, 3);
  for (size_t i = 0; i < depth.size(); ++i) {
    if (opacity.values[i] > 0.5f)
      CHECK(bad.values[i] == depth.values[i] + 0.25f);
    else
      CHECK(bad.values[i] == depth.values[i]);
  }
}

TEST_CASE("missing-surface uses the far-side intersection on a sphere") {
  SdfScene scene = unit_sphere();
  Camera cam = Camera::look_at({2.5, 0.4, 0.3}, {0, 0, 0}, intr32());
  auto [depth, opacity] = render_depth_opacity(scene, cam);
  auto [bad, blob] = inject_infidelity(scene, cam, depth, opacity,
                                       InfidelityKind::kMissingSurface, 0.2, 0.1, 5);
  int verified = 0;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      if (!blob.at(x, y) || !is_hit(bad.at(x, y))) continue;
      // analytic second root of the ray-sphere quadratic
      Eigen::Vector3d dir = (unproject(cam, {double(x), double(y)}, 1.0) - cam.center());
      double dirz = 1.0 / dir.norm();  // depth advanced per unit ray length
      dir.normalize();
      auto [t1, t2] = sphere_ray_roots(cam.center(), dir, 1.0);
      CHECK(bad.at(x, y) == doctest::Approx(t2 * dirz).epsilon(1e-3));
      CHECK(depth.at(x, y) == doctest::Approx(t1 * dirz).epsilon(1e-3));
      ++verified;
    }
  CHECK(verified > 10);
}

TEST_CASE("infidelity arguments are validated") {
  SdfScene scene = unit_sphere();
  Camera cam = orbit_camera(0.0, 15.0, 2.5, intr32());
  auto [depth, opacity] = render_depth_opacity(scene, cam);
  CHECK_THROWS_AS(inject_infidelity(scene, cam, depth, opacity, InfidelityKind::kConcavity, 0.0,
                                    0.3, 0),
                  InvalidSpecError);
  CHECK_THROWS_AS(inject_infidelity(scene, cam, depth, opacity, InfidelityKind::kConcavity, 0.5,
                                    -0.1, 0),
                  InvalidSpecError);

  OpacityMap empty(32, 32, 0.0f);
  DepthMap none(32, 32, kNoHitDepth);
  CHECK_THROWS_AS(inject_infidelity(scene, cam, none, empty, InfidelityKind::kConcavity, 0.5, 0.3,
                                    0),
                  EmptyForegroundError);
}

TEST_CASE("smooth-union blend keeps the scene bounded") {
  SdfScene scene;
  scene.primitives.push_back({SdfShape::kSphere, {0.4, 0, 0}, {0.6}, 0.0});
  scene.primitives.push_back({SdfShape::kRoundedBox, {-0.4, 0, 0}, {0.3, 0.3, 0.3, 0.1}, 0.2});
  scene.primitives.push_back({SdfShape::kTorus, {0, 0, -0.4}, {0.6, 0.15}, 0.1});
  double bound = scene.bounding_radius();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 500; ++i) {
    Eigen::Vector3d p(u(rng), u(rng), u(rng));
    p = p.normalized() * (bound + 0.5);
    CHECK(scene.sdf(p) > 0);
  }
}
