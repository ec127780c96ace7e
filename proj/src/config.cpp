#include "corrview/config.hpp"

#include <json.hpp>
#include <set>
#include <sstream>

#include "corrview/errors.hpp"
#include "corrview/io.hpp"

namespace corrview {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::string& section,
                  const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError("section '" + section + "' must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown config key: " + section + "." + it.key());
}

double num(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + " must be a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + " must be an integer");
  return j.get<int>();
}

SdfScene scene_from_json(const json& j) {
  require_keys(j, "scene", {"primitives"});
  if (!j.contains("primitives") || !j["primitives"].is_array() || j["primitives"].empty())
    throw ConfigError("scene.primitives must be a non-empty array");

  SdfScene scene;
  int idx = 0;
  for (const auto& pj : j["primitives"]) {
    std::string where = "scene.primitives[" + std::to_string(idx++) + "]";
    require_keys(pj, where, {"shape", "center", "params", "blend"});
    SdfPrimitive prim;
    prim.shape = sdf_shape_from_string(pj.at("shape").get<std::string>());
    auto center = pj.at("center");
    if (!center.is_array() || center.size() != 3)
      throw ConfigError(where + ".center must hold 3 numbers");
    for (int i = 0; i < 3; ++i) prim.center[i] = num(center[i], where + ".center");
    for (const auto& v : pj.at("params")) prim.params.push_back(num(v, where + ".params"));
    prim.blend = pj.contains("blend") ? num(pj["blend"], where + ".blend") : 0.0;
    if (prim.blend < 0) throw ConfigError(where + ".blend must be >= 0");

    size_t want = 0;
    switch (prim.shape) {
      case SdfShape::kSphere: want = 1; break;
      case SdfShape::kBox: want = 3; break;
      case SdfShape::kRoundedBox: want = 4; break;
      case SdfShape::kTorus: want = 2; break;
    }
    if (prim.params.size() != want)
      throw ConfigError(where + ": shape '" + to_string(prim.shape) + "' needs " +
                        std::to_string(want) + " params");
    scene.primitives.push_back(std::move(prim));
  }
  return scene;
}

}  // namespace

DeltaAlphaPolicy DeltaAlphaPolicy::parse(const std::string& text) {
  DeltaAlphaPolicy policy;
  std::istringstream ss(text);
  std::string kind;
  std::getline(ss, kind, ':');
  if (kind == "fixed") {
    policy.resample = false;
    std::string v;
    if (!std::getline(ss, v)) throw ConfigError("delta_alpha: expected fixed:<degrees>");
    policy.fixed_deg = std::stod(v);
  } else if (kind == "uniform") {
    policy.resample = true;
    std::string lo, hi;
    if (!std::getline(ss, lo, ':') || !std::getline(ss, hi))
      throw ConfigError("delta_alpha: expected uniform:<lo>:<hi>");
    policy.lo = std::stod(lo);
    policy.hi = std::stod(hi);
    if (policy.lo <= 0 || policy.hi < policy.lo)
      throw ConfigError("delta_alpha: need 0 < lo <= hi");
  } else {
    throw ConfigError("delta_alpha: unknown policy '" + kind + "'");
  }
  return policy;
}

std::string DeltaAlphaPolicy::to_string() const {
  if (resample)
    return "uniform:" + format_json_double(lo) + ":" + format_json_double(hi);
  return "fixed:" + format_json_double(fixed_deg);
}

SdfScene parse_scene_json(const std::string& json_text) {
  try {
    return scene_from_json(json::parse(json_text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scene JSON: ") + e.what());
  }
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config JSON: ") + e.what());
  }

  try {
    require_keys(j, "<root>",
                 {"scene", "rig", "infidelity", "features", "filter", "huber", "schedule",
                  "correction", "output"});
    if (!j.contains("scene")) throw ConfigError("missing required section: scene");
    if (!j.contains("output")) throw ConfigError("missing required section: output");

    ExperimentConfig cfg;
    cfg.scene = scene_from_json(j["scene"]);

    if (j.contains("rig")) {
      const auto& r = j["rig"];
      require_keys(r, "rig",
                   {"n", "delta_alpha", "radius", "elevation", "width", "height", "fov_deg",
                    "seed"});
      if (r.contains("n")) cfg.rig.n = integer(r["n"], "rig.n");
      if (r.contains("delta_alpha")) {
        if (r["delta_alpha"].is_string()) {
          if (r["delta_alpha"].get<std::string>() != "random")
            throw ConfigError("rig.delta_alpha must be a number or \"random\"");
          cfg.rig.delta_alpha = std::nullopt;
        } else {
          cfg.rig.delta_alpha = num(r["delta_alpha"], "rig.delta_alpha");
        }
      }
      if (r.contains("radius")) cfg.rig.radius = num(r["radius"], "rig.radius");
      if (r.contains("elevation")) cfg.rig.elevation = num(r["elevation"], "rig.elevation");
      if (r.contains("width")) cfg.rig.width = integer(r["width"], "rig.width");
      if (r.contains("height")) cfg.rig.height = integer(r["height"], "rig.height");
      if (r.contains("fov_deg")) cfg.rig.fov_deg = num(r["fov_deg"], "rig.fov_deg");
      if (r.contains("seed")) cfg.rig.seed = r["seed"].get<uint64_t>();
    }

    if (j.contains("infidelity")) {
      const auto& f = j["infidelity"];
      require_keys(f, "infidelity", {"kind", "mask_fraction", "magnitude", "seed", "views"});
      if (f.contains("kind")) {
        std::string kind = f["kind"].get<std::string>();
        if (kind == "concavity")
          cfg.infidelity.kind = InfidelityKind::kConcavity;
        else if (kind == "missing-surface")
          cfg.infidelity.kind = InfidelityKind::kMissingSurface;
        else
          throw ConfigError("infidelity.kind must be concavity or missing-surface");
      }
      if (f.contains("mask_fraction"))
        cfg.infidelity.mask_fraction = num(f["mask_fraction"], "infidelity.mask_fraction");
      if (f.contains("magnitude"))
        cfg.infidelity.magnitude = num(f["magnitude"], "infidelity.magnitude");
      if (f.contains("seed")) cfg.infidelity.seed = f["seed"].get<uint64_t>();
      if (f.contains("views")) {
        cfg.infidelity.views = f["views"].get<std::string>();
        if (cfg.infidelity.views != "v1" && cfg.infidelity.views != "v2" &&
            cfg.infidelity.views != "both")
          throw ConfigError("infidelity.views must be v1, v2 or both");
      }
    }

    if (j.contains("features")) {
      const auto& f = j["features"];
      require_keys(f, "features", {"h", "w", "scale", "layers"});
      if (f.contains("h")) cfg.features.h = integer(f["h"], "features.h");
      if (f.contains("w")) cfg.features.w = integer(f["w"], "features.w");
      if (f.contains("scale")) cfg.features.spec.scale = num(f["scale"], "features.scale");
      if (f.contains("layers")) {
        cfg.features.spec.layers.clear();
        int idx = 0;
        for (const auto& lj : f["layers"]) {
          std::string where = "features.layers[" + std::to_string(idx++) + "]";
          require_keys(lj, where, {"id", "h", "w", "c"});
          FeatureLayerSpec ls;
          ls.layer_id = integer(lj.at("id"), where + ".id");
          ls.height = integer(lj.at("h"), where + ".h");
          ls.width = integer(lj.at("w"), where + ".w");
          ls.channels = integer(lj.at("c"), where + ".c");
          cfg.features.spec.layers.push_back(ls);
        }
        if (cfg.features.spec.layers.empty())
          throw ConfigError("features.layers must be non-empty");
      }
    }

    if (j.contains("filter")) {
      const auto& f = j["filter"];
      require_keys(f, "filter", {"tau_epi", "opacity_edge_threshold", "pool_kernel"});
      if (f.contains("tau_epi")) cfg.filter.tau_epi = num(f["tau_epi"], "filter.tau_epi");
      if (f.contains("opacity_edge_threshold"))
        cfg.filter.opacity_edge_threshold =
            num(f["opacity_edge_threshold"], "filter.opacity_edge_threshold");
      if (f.contains("pool_kernel"))
        cfg.filter.pool_kernel = integer(f["pool_kernel"], "filter.pool_kernel");
      if (cfg.filter.tau_epi <= 0) throw ConfigError("filter.tau_epi must be > 0");
      if (cfg.filter.opacity_edge_threshold <= 0 || cfg.filter.opacity_edge_threshold > 1)
        throw ConfigError("filter.opacity_edge_threshold must lie in (0, 1]");
    }

    if (j.contains("huber")) {
      const auto& h = j["huber"];
      require_keys(h, "huber", {"delta", "reduction"});
      if (h.contains("delta")) cfg.huber.delta = num(h["delta"], "huber.delta");
      if (cfg.huber.delta <= 0) throw ConfigError("huber.delta must be > 0");
      if (h.contains("reduction")) {
        std::string r = h["reduction"].get<std::string>();
        if (r == "sum")
          cfg.huber.reduction = LossReduction::kSum;
        else if (r == "mean")
          cfg.huber.reduction = LossReduction::kMeanOverMatches;
        else
          throw ConfigError("huber.reduction must be sum or mean");
      }
    }

    if (j.contains("schedule")) {
      const auto& s = j["schedule"];
      require_keys(s, "schedule", {"T", "t_start", "t_end"});
      if (s.contains("T")) cfg.schedule.total_iters = integer(s["T"], "schedule.T");
      if (s.contains("t_start")) cfg.schedule.t_start = integer(s["t_start"], "schedule.t_start");
      if (s.contains("t_end")) cfg.schedule.t_end = integer(s["t_end"], "schedule.t_end");
      cfg.schedule.validate();
    }

    if (j.contains("correction")) {
      const auto& c = j["correction"];
      require_keys(c, "correction",
                   {"lr", "lambda_corr", "lambda_sds_proxy", "k", "noise_sigma", "seed",
                    "delta_alpha", "smooth_norm"});
      if (c.contains("lr")) cfg.correction.learning_rate = num(c["lr"], "correction.lr");
      if (cfg.correction.learning_rate <= 0) throw ConfigError("correction.lr must be > 0");
      if (c.contains("lambda_corr"))
        cfg.correction.lambda_corr = num(c["lambda_corr"], "correction.lambda_corr");
      if (c.contains("lambda_sds_proxy"))
        cfg.correction.lambda_sds_proxy = num(c["lambda_sds_proxy"], "correction.lambda_sds_proxy");
      if (c.contains("k")) cfg.correction.smoothing_kernel = integer(c["k"], "correction.k");
      if (c.contains("noise_sigma"))
        cfg.correction.noise_sigma = num(c["noise_sigma"], "correction.noise_sigma");
      if (c.contains("seed")) cfg.correction.seed = c["seed"].get<uint64_t>();
      if (c.contains("delta_alpha"))
        cfg.correction.delta_alpha = DeltaAlphaPolicy::parse(c["delta_alpha"].get<std::string>());
      if (c.contains("smooth_norm")) {
        std::string m = c["smooth_norm"].get<std::string>();
        if (m == "mass-preserving")
          cfg.correction.smooth_norm = SmoothNorm::kMassPreserving;
        else if (m == "count-mean")
          cfg.correction.smooth_norm = SmoothNorm::kCountMean;
        else if (m == "k3")
          cfg.correction.smooth_norm = SmoothNorm::kUniformK3;
        else
          throw ConfigError("correction.smooth_norm must be mass-preserving, count-mean or k3");
      }
    }

    {
      const auto& o = j["output"];
      require_keys(o, "output", {"dir", "checkpoints", "heatmap_clip"});
      if (!o.contains("dir")) throw ConfigError("output.dir is required");
      cfg.output.dir = o["dir"].get<std::string>();
      if (o.contains("checkpoints"))
        for (const auto& v : o["checkpoints"])
          cfg.output.checkpoints.push_back(integer(v, "output.checkpoints"));
      if (o.contains("heatmap_clip"))
        cfg.output.heatmap_clip = num(o["heatmap_clip"], "output.heatmap_clip");
    }
    if (cfg.output.checkpoints.empty())
      cfg.output.checkpoints = {0, cfg.schedule.total_iters - 1};

    // Pixel-space math (epipolar lines, reprojections) runs on the
    // correlation grid, so it must coincide with the camera grid.
    if (cfg.features.h != cfg.rig.height || cfg.features.w != cfg.rig.width)
      throw ConfigError("features.h/w must equal rig.height/width");
    for (const auto& ls : cfg.features.spec.layers)
      if (ls.height > cfg.rig.height || ls.width > cfg.rig.width)
        throw ConfigError("features.layers dims must not exceed the render dims");

    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config JSON: ") + e.what());
  }
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(read_text_file(path));
}

}  // namespace corrview
