#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "corrview/config.hpp"
#include "corrview/correction.hpp"
#include "corrview/correlation.hpp"
#include "corrview/errors.hpp"
#include "corrview/features.hpp"
#include "corrview/io.hpp"
#include "corrview/loss.hpp"
#include "corrview/match_filter.hpp"
#include "corrview/parallel.hpp"
#include "corrview/schedule.hpp"
#include "corrview/sdf_scene.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using namespace corrview;

RigConfig parse_rig_arg(const std::string& text) {
  RigConfig rig;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("--rig expects k=v pairs: " + item);
    std::string key = item.substr(0, eq), val = item.substr(eq + 1);
    if (key == "n")
      rig.n = std::stoi(val);
    else if (key == "da")
      rig.delta_alpha = val == "random" ? std::optional<double>() : std::optional<double>(std::stod(val));
    else if (key == "radius")
      rig.radius = std::stod(val);
    else if (key == "elev")
      rig.elevation = std::stod(val);
    else if (key == "seed")
      rig.seed = std::stoull(val);
    else
      throw ConfigError("--rig: unknown key '" + key + "'");
  }
  return rig;
}

std::vector<FeatureLayerSpec> parse_layers_arg(const std::string& text) {
  // "6:32x32x48,9:16x16x32"
  std::vector<FeatureLayerSpec> layers;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    FeatureLayerSpec ls;
    if (std::sscanf(item.c_str(), "%d:%dx%dx%d", &ls.layer_id, &ls.height, &ls.width,
                    &ls.channels) != 4)
      throw ConfigError("--layers expects id:HxWxC entries: " + item);
    layers.push_back(ls);
  }
  if (layers.empty()) throw ConfigError("--layers must be non-empty");
  return layers;
}

OpacityMap opacity_from_pgm(const Grid<uint16_t>& img) {
  OpacityMap op(img.width, img.height);
  for (size_t i = 0; i < img.size(); ++i) op.values[i] = static_cast<float>(img.values[i]) / 65535.0f;
  return op;
}

int cmd_scene(const std::string& scene_path, const std::string& rig_arg, const std::string& out_dir,
              int width, int height, double fov, const std::string& layers_arg, double scale,
              double noise_sigma, uint64_t seed) {
  SdfScene scene = parse_scene_json(read_text_file(scene_path));
  RigConfig rc = parse_rig_arg(rig_arg);
  rc.width = width;
  rc.height = height;
  rc.fov_deg = fov;
  if (seed) rc.seed = seed;

  FeatureSpec spec;
  spec.layers = parse_layers_arg(layers_arg);
  spec.scale = scale;

  CameraRig rig =
      build_rig(rc.n, rc.delta_alpha, rc.radius, rc.elevation, rc.intrinsics(), rc.seed);
  std::filesystem::create_directories(out_dir);
  write_rig_json(out_dir + "/rig.json", rig);

  for (int set = 0; set < 2; ++set) {
    const auto& cams = set == 0 ? rig.cameras_v1 : rig.cameras_v2;
    std::string tag = set == 0 ? "v1" : "v2";
    for (int i = 0; i < rig.n_views; ++i) {
      auto [depth, opacity] = render_depth_opacity(scene, cams[i]);
      FeatureStack features = synthesize_features(scene, cams[i], depth, spec, noise_sigma, seed,
                                                  set * rig.n_views + i);
      std::string stem = out_dir + "/" + tag + "_" + std::to_string(i);
      write_pfm(stem + "_depth.pfm", depth);
      Grid<uint16_t> op16(opacity.width, opacity.height);
      for (size_t k = 0; k < opacity.size(); ++k)
        op16.values[k] = static_cast<uint16_t>(std::lround(opacity.values[k] * 65535.0f));
      write_pgm16(stem + "_opacity.pgm", op16);
      write_cvfs(stem + "_features.cvfs", features);
    }
  }
  std::cout << "wrote " << 2 * rig.n_views << " views to " << out_dir << "\n";
  return 0;
}

int cmd_match(const std::string& in_dir, const std::string& out_dir, double tau_epi,
              double opacity_threshold, int pool_kernel, int k_smooth,
              const std::string& smooth_norm_arg) {
  CameraRig rig = read_rig_json(in_dir + "/rig.json");
  std::filesystem::create_directories(out_dir);

  FilterConfig filter;
  filter.tau_epi = tau_epi;
  filter.opacity_edge_threshold = opacity_threshold;
  filter.pool_kernel = pool_kernel;

  SmoothNorm norm = SmoothNorm::kMassPreserving;
  if (smooth_norm_arg == "count-mean")
    norm = SmoothNorm::kCountMean;
  else if (smooth_norm_arg == "k3")
    norm = SmoothNorm::kUniformK3;
  else if (smooth_norm_arg != "mass-preserving")
    throw ConfigError("--smooth-norm must be mass-preserving, count-mean or k3");

  JsonNode summary = JsonNode::object();
  JsonNode pairs = JsonNode::array();

  for (int i = 0; i < rig.n_views; ++i) {
    std::string s1 = in_dir + "/v1_" + std::to_string(i);
    std::string s2 = in_dir + "/v2_" + std::to_string(i);
    FeatureStack f_src = read_cvfs(s1 + "_features.cvfs", i);
    FeatureStack f_dst = read_cvfs(s2 + "_features.cvfs", rig.n_views + i);
    OpacityMap op_src = opacity_from_pgm(read_pgm16(s1 + "_opacity.pgm"));
    OpacityMap op_dst = opacity_from_pgm(read_pgm16(s2 + "_opacity.pgm"));

    const Camera& cam_src = rig.cameras_v1[i];
    const Camera& cam_dst = rig.cameras_v2[i];
    if (op_src.width != cam_src.width || op_src.height != cam_src.height ||
        op_dst.width != cam_dst.width || op_dst.height != cam_dst.height)
      throw FormatError("opacity resolution disagrees with the rig cameras");
    for (const auto& layer : f_src.layers)
      if (layer.height > cam_src.height || layer.width > cam_src.width)
        throw FormatError("feature layer resolution exceeds the camera resolution");

    CorrelationVolume vol = build_correlation(f_src, f_dst, cam_src.height, cam_src.width);
    vol = normalize_to_unit_range(vol);
    vol = mutual_nn_filter(vol);
    vol = smooth_4d(vol, k_smooth, norm);
    RawCorrespondenceField raw = extract_correspondences(vol);

    Mask mask_src = foreground_mask(op_src, filter);
    Mask mask_dst = foreground_mask(op_dst, filter);
    CorrespondenceSet set = apply_filters(raw, cam_src, cam_dst, mask_src, mask_dst, filter);
    write_correspondences_jsonl(out_dir + "/pair_" + std::to_string(i) + ".jsonl", set);

    JsonNode pj = JsonNode::object();
    pj["pair"] = JsonNode(i);
    pj["input"] = JsonNode(set.stats.input);
    pj["after_source_mask"] = JsonNode(set.stats.after_source_mask);
    pj["after_target_mask"] = JsonNode(set.stats.after_target_mask);
    pj["after_epipolar"] = JsonNode(set.stats.after_epipolar);
    pj["after_bounds"] = JsonNode(set.stats.after_bounds);
    pairs.push_back(std::move(pj));
  }
  summary["pairs"] = std::move(pairs);
  write_text_file(out_dir + "/summary.json", summary.dump(2) + "\n");
  std::cout << "wrote " << rig.n_views << " pair files to " << out_dir << "\n";
  return 0;
}

int cmd_correct(const std::string& config_path, bool dry_run) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  if (dry_run) {
    std::cout << "config ok: " << config_path << "\n";
    return 0;
  }
  try {
    CorrectionTrace trace = run_experiment(cfg);
    emit_trace(trace, cfg.output.dir, cfg.output.heatmap_clip);
    std::cout << "MADE_reduction=" << format_json_double(made_reduction_percent(trace)) << "\n";
    return 0;
  } catch (const StalledCorrectionError& e) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.output.dir, ec);
    write_text_file(cfg.output.dir + "/stall_diagnostic.txt", std::string(e.what()) + "\n");
    std::cerr << "stalled correction: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cross-view correspondence toolkit"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "cap worker threads (default: machine cores)")
      ->envname("CORRVIEW_THREADS");

  auto* scene = app.add_subcommand("scene", "render rig views: depth, opacity, features");
  std::string scene_config, rig_arg = "n=4,da=20", out_dir;
  int width = 32, height = 32;
  double fov = 60.0, scale = 0.15, noise_sigma = 0.0;
  uint64_t seed = 0;
  std::string layers_arg = "6:32x32x48,9:16x16x32";
  scene->add_option("--config", scene_config, "scene JSON")->required();
  scene->add_option("--rig", rig_arg, "rig spec, e.g. n=4,da=20 (da=random to sample)");
  scene->add_option("--out", out_dir, "output directory")->required();
  scene->add_option("--width", width);
  scene->add_option("--height", height);
  scene->add_option("--fov", fov, "horizontal field of view, degrees");
  scene->add_option("--layers", layers_arg, "feature layers id:HxWxC[,...]");
  scene->add_option("--scale", scale, "feature embedding bandwidth");
  scene->add_option("--noise", noise_sigma, "feature noise sigma");
  scene->add_option("--seed", seed);

  auto* match = app.add_subcommand("match", "correspondences for each adjacent pair");
  std::string match_in, match_out, smooth_norm_arg = "mass-preserving";
  double tau_epi = 2.0, opacity_threshold = 0.99;
  int pool_kernel = 3, k_smooth = 3;
  match->add_option("--in", match_in, "directory produced by `scene`")->required();
  match->add_option("--out", match_out, "output directory")->required();
  match->add_option("--tau-epi", tau_epi, "epipolar distance threshold, px");
  match->add_option("--opacity-threshold", opacity_threshold);
  match->add_option("--pool", pool_kernel, "opacity pooling kernel (odd)");
  match->add_option("--smooth", k_smooth, "4D smoothing kernel (odd)");
  match->add_option("--smooth-norm", smooth_norm_arg, "mass-preserving | count-mean | k3");

  auto* correct = app.add_subcommand("correct", "run a depth-correction experiment");
  std::string correct_config;
  bool dry_run = false;
  correct->add_option("--config", correct_config, "experiment JSON")->required();
  correct->add_flag("--dry-run", dry_run, "validate the config and exit");

  auto* version = app.add_subcommand("version", "print version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  set_thread_cap(threads);
  try {
    if (scene->parsed())
      return cmd_scene(scene_config, rig_arg, out_dir, width, height, fov, layers_arg, scale,
                       noise_sigma, seed);
    if (match->parsed())
      return cmd_match(match_in, match_out, tau_epi, opacity_threshold, pool_kernel, k_smooth,
                       smooth_norm_arg);
    if (correct->parsed()) return cmd_correct(correct_config, dry_run);
    if (version->parsed()) {
      std::cout << "corrview " << kVersion << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
