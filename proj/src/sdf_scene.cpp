#include "corrview/sdf_scene.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "corrview/errors.hpp"
#include "corrview/parallel.hpp"

namespace corrview {

namespace {

double smooth_min(double a, double b, double k) {
  if (k <= 0) return std::min(a, b);
  double h = std::clamp(0.5 + 0.5 * (b - a) / k, 0.0, 1.0);
  return b + (a - b) * h - k * h * (1.0 - h);
}

double primitive_sdf(const SdfPrimitive& prim, const Eigen::Vector3d& point) {
  Eigen::Vector3d p = point - prim.center;
  switch (prim.shape) {
    case SdfShape::kSphere:
      return p.norm() - prim.params[0];
    case SdfShape::kBox: {
      Eigen::Vector3d q = p.cwiseAbs() - Eigen::Vector3d(prim.params[0], prim.params[1], prim.params[2]);
      double outside = q.cwiseMax(0.0).norm();
      double inside = std::min(q.maxCoeff(), 0.0);
      return outside + inside;
    }
    case SdfShape::kRoundedBox: {
      Eigen::Vector3d q = p.cwiseAbs() - Eigen::Vector3d(prim.params[0], prim.params[1], prim.params[2]);
      double outside = q.cwiseMax(0.0).norm();
      double inside = std::min(q.maxCoeff(), 0.0);
      return outside + inside - prim.params[3];
    }
    case SdfShape::kTorus: {
      double ring = std::hypot(p.x(), p.y()) - prim.params[0];
      return std::hypot(ring, p.z()) - prim.params[1];
    }
  }
  return 1e30;
}

double primitive_reach(const SdfPrimitive& prim) {
  switch (prim.shape) {
    case SdfShape::kSphere:
      return prim.params[0];
    case SdfShape::kBox:
      return Eigen::Vector3d(prim.params[0], prim.params[1], prim.params[2]).norm();
    case SdfShape::kRoundedBox:
      return Eigen::Vector3d(prim.params[0], prim.params[1], prim.params[2]).norm() + prim.params[3];
    case SdfShape::kTorus:
      return prim.params[0] + prim.params[1];
  }
  return 0;
}

struct Ray {
  Eigen::Vector3d origin;
  Eigen::Vector3d dir;    // unit, world frame
  double depth_per_unit;  // camera-frame Z advanced per unit of ray length
};

Ray pixel_ray(const Camera& cam, double px, double py) {
  Eigen::Vector3d dir_cam((px - cam.cx) / cam.fx, (py - cam.cy) / cam.fy, 1.0);
  double inv_norm = 1.0 / dir_cam.norm();
  Ray ray;
  ray.origin = cam.center();
  ray.dir = (cam.rotation.transpose() * dir_cam).normalized();
  ray.depth_per_unit = inv_norm;
  return ray;
}

/// First surface hit along the ray; returns ray length, or -1 on miss.
double trace(const SdfScene& scene, const Ray& ray, double s_max, const RenderOptions& opts) {
  double s = 0;
  for (int step = 0; step < opts.max_steps; ++step) {
    double d = scene.sdf(ray.origin + s * ray.dir);
    if (d < opts.hit_epsilon) return s;
    s += d;
    if (s > s_max) return -1;
  }
  return -1;
}

}  // namespace

SdfShape sdf_shape_from_string(const std::string& name) {
  if (name == "sphere") return SdfShape::kSphere;
  if (name == "box") return SdfShape::kBox;
  if (name == "rounded-box") return SdfShape::kRoundedBox;
  if (name == "torus") return SdfShape::kTorus;
  throw ConfigError("unknown primitive shape: " + name);
}

std::string to_string(SdfShape shape) {
  switch (shape) {
    case SdfShape::kSphere: return "sphere";
    case SdfShape::kBox: return "box";
    case SdfShape::kRoundedBox: return "rounded-box";
    case SdfShape::kTorus: return "torus";
  }
  return "?";
}

double SdfScene::sdf(const Eigen::Vector3d& point) const {
  if (primitives.empty()) return 1e30;
  double d = primitive_sdf(primitives[0], point);
  for (size_t i = 1; i < primitives.size(); ++i)
    d = smooth_min(d, primitive_sdf(primitives[i], point), primitives[i].blend);
  return d;
}

double SdfScene::bounding_radius() const {
  double bound = 0;
  for (const auto& prim : primitives)
    bound = std::max(bound, prim.center.norm() + primitive_reach(prim) + prim.blend);
  return bound;
}

std::pair<DepthMap, OpacityMap> render_depth_opacity(const SdfScene& scene, const Camera& cam,
                                                     const RenderOptions& opts) {
  double bound = scene.bounding_radius();
  if (cam.center().norm() <= bound)
    throw InsideSceneError("camera center lies inside the scene bounding sphere");

  DepthMap depth(cam.width, cam.height, kNoHitDepth);
  OpacityMap opacity(cam.width, cam.height, 0.0f);
  double s_max = cam.center().norm() + 4.0 * bound + 1.0;

  parallel_for(cam.height, [&](int y) {
    for (int x = 0; x < cam.width; ++x) {
      Ray ray = pixel_ray(cam, x, y);
      double s = trace(scene, ray, s_max, opts);
      if (s >= 0) {
        depth.at(x, y) = static_cast<float>(s * ray.depth_per_unit);
        opacity.at(x, y) = 1.0f;
      }
    }
  });
  return {std::move(depth), std::move(opacity)};
}

float second_intersection_depth(const SdfScene& scene, const Camera& cam, const Pixel& pixel,
                                const RenderOptions& opts) {
  double bound = scene.bounding_radius();
  double s_max = cam.center().norm() + 4.0 * bound + 1.0;
  Ray ray = pixel_ray(cam, pixel.x, pixel.y);

  double s1 = trace(scene, ray, s_max, opts);
  if (s1 < 0) return kNoHitDepth;

  // Penetrate the first surface with fixed small steps.
  double step = std::max(8.0 * opts.hit_epsilon, 1e-4);
  double s = s1 + 4.0 * opts.hit_epsilon;
  double d = scene.sdf(ray.origin + s * ray.dir);
  int guard = 0;
  const double clearance = 0.02 + opts.hit_epsilon;
  while (d >= -opts.hit_epsilon && guard++ < 4096) {
    if (d > clearance) {
      // Grazing ray left the surface without entering; look for a later hit.
      double rest = trace(scene, {ray.origin + s * ray.dir, ray.dir, ray.depth_per_unit},
                          s_max - s, opts);
      return rest < 0 ? kNoHitDepth : static_cast<float>((s + rest) * ray.depth_per_unit);
    }
    s += step;
    if (s > s_max) return kNoHitDepth;
    d = scene.sdf(ray.origin + s * ray.dir);
  }
  if (d >= -opts.hit_epsilon) return kNoHitDepth;

  // Inside the solid: sphere-trace the exit.
  for (int i = 0; i < opts.max_steps; ++i) {
    s += std::max(-d, opts.hit_epsilon);
    if (s > s_max) return kNoHitDepth;
    d = scene.sdf(ray.origin + s * ray.dir);
    if (d >= -opts.hit_epsilon) return static_cast<float>(s * ray.depth_per_unit);
  }
  return kNoHitDepth;
}

std::pair<DepthMap, Mask> inject_infidelity(const SdfScene& scene, const Camera& cam,
                                            const DepthMap& depth, const OpacityMap& opacity,
                                            InfidelityKind kind, double mask_fraction,
                                            double magnitude, uint64_t seed) {
  if (mask_fraction <= 0 || mask_fraction > 1)
    throw InvalidSpecError("mask_fraction must lie in (0, 1]");
  if (magnitude <= 0) throw InvalidSpecError("magnitude must be positive");

  std::vector<uint8_t> is_fg(opacity.size(), 0);
  std::vector<int> foreground;
  for (int i = 0; i < static_cast<int>(opacity.size()); ++i) {
    if (opacity.values[i] > 0.5f && is_hit(depth.values[i])) {
      is_fg[i] = 1;
      foreground.push_back(i);
    }
  }
  if (foreground.empty()) throw EmptyForegroundError("no foreground pixels to corrupt");

  // Interior = foreground whose 8-neighborhood is all foreground. The blob
  // grows there first, mimicking interior surface defects rather than
  // silhouette clipping.
  auto is_interior = [&](int idx) {
    int x = idx % depth.width, y = idx / depth.width;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        int nx = x + dx, ny = y + dy;
        if (!depth.in_bounds(nx, ny) || !is_fg[ny * depth.width + nx]) return false;
      }
    return true;
  };

  const int count = static_cast<int>(foreground.size());
  const int target = std::min(count, std::max(1, static_cast<int>(std::ceil(mask_fraction * count))));

  Mask blob(depth.width, depth.height, 0);
  std::mt19937_64 rng(seed);

  if (target == count) {
    for (int idx : foreground) blob.values[idx] = 1;
  } else {
    // Randomized region growth over the 4-neighborhood, interior pixels
    // first; restarts cover disconnected foregrounds so the target count is
    // always reached.
    std::vector<int> interior;
    for (int idx : foreground)
      if (is_interior(idx)) interior.push_back(idx);

    std::vector<int> frontier;
    int marked = 0;
    auto mark = [&](int idx) {
      blob.values[idx] = 1;
      frontier.push_back(idx);
      ++marked;
    };
    auto grow = [&](bool interior_only) {
      while (marked < target && !frontier.empty()) {
        size_t pick = rng() % frontier.size();
        int idx = frontier[pick];
        int x = idx % depth.width, y = idx / depth.width;
        const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
        bool grew = false;
        for (int k = 0; k < 4 && marked < target; ++k) {
          int nx = x + dx[k], ny = y + dy[k];
          if (!depth.in_bounds(nx, ny)) continue;
          int nidx = ny * depth.width + nx;
          if (blob.values[nidx] || !is_fg[nidx]) continue;
          if (interior_only && !is_interior(nidx)) continue;
          mark(nidx);
          grew = true;
        }
        if (!grew) {
          frontier[pick] = frontier.back();
          frontier.pop_back();
        }
      }
    };

    mark(interior.empty() ? foreground[rng() % count] : interior[rng() % interior.size()]);
    grow(true);
    if (marked < target) {
      // Re-seed the frontier with the blob and admit edge pixels.
      for (int idx : foreground)
        if (blob.values[idx]) frontier.push_back(idx);
      grow(false);
    }
    while (marked < target) {
      std::vector<int> unmarked;
      for (int idx : foreground)
        if (!blob.values[idx]) unmarked.push_back(idx);
      mark(unmarked[rng() % unmarked.size()]);
      grow(false);
    }
  }

  DepthMap corrupted = depth;
  for (int i = 0; i < static_cast<int>(blob.size()); ++i) {
    if (!blob.values[i]) continue;
    if (kind == InfidelityKind::kConcavity) {
      corrupted.values[i] = depth.values[i] + static_cast<float>(magnitude);
    } else {
      Pixel px{i % depth.width, i / depth.width};
      corrupted.values[i] = second_intersection_depth(scene, cam, px);
    }
  }
  return {std::move(corrupted), std::move(blob)};
}

}  // namespace corrview
