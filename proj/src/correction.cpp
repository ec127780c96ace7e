#include "corrview/correction.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "corrview/correlation.hpp"
#include "corrview/errors.hpp"
#include "corrview/features.hpp"
#include "corrview/io.hpp"
#include "corrview/loss.hpp"
#include "corrview/match_filter.hpp"
#include "corrview/parallel.hpp"

namespace corrview {

namespace {

struct ViewState {
  std::string name;
  Camera cam;
  double azimuth_deg = 0;
  DepthMap depth;      // optimization state
  DepthMap initial;    // input (corrupted) maps, the prior-pull anchor
  DepthMap gt;         // fresh render of the scene
  OpacityMap opacity;  // from the ground-truth render
  Mask fg_mask;
  FeatureStack features;
  Mask corrupted;  // pixels whose input differs from the ground truth
};

struct PartnerData {
  Camera cam;
  Mask fg_mask;
  FeatureStack features;
};

struct EvalResult {
  CorrespondenceSet set;
  LossReport report;
};

double view_azimuth_deg(const Camera& cam) {
  Eigen::Vector3d c = cam.center();
  return std::atan2(c.y(), c.x()) * 180.0 / 3.14159265358979323846;
}

/// Correlation pipeline: volume, unit-range map, mutual-NN, smoothing, argmax,
/// then the four filter stages.
CorrespondenceSet correspondence_pipeline(const FeatureStack& src_features, const Camera& src_cam,
                                          const Mask& src_mask, const FeatureStack& dst_features,
                                          const Camera& dst_cam, const Mask& dst_mask,
                                          const ExperimentConfig& cfg) {
  CorrelationVolume vol =
      build_correlation(src_features, dst_features, cfg.features.h, cfg.features.w);
  vol = normalize_to_unit_range(vol);
  vol = mutual_nn_filter(vol);
  vol = smooth_4d(vol, cfg.correction.smoothing_kernel, cfg.correction.smooth_norm);
  RawCorrespondenceField raw = extract_correspondences(vol);
  return apply_filters(raw, src_cam, dst_cam, src_mask, dst_mask, cfg.filter);
}

EvalResult evaluate_pair(const ViewState& src, const Camera& dst_cam,
                         const CorrespondenceSet& set, const ExperimentConfig& cfg) {
  std::vector<Pixel> pixels;
  pixels.reserve(set.matches.size());
  for (const auto& m : set.matches) pixels.push_back(m.source);
  ReprojectionField corr_nerf = reproject_correspondences(src.depth, src.cam, dst_cam, pixels);
  EvalResult result;
  result.report = corr_loss(set, corr_nerf, src.depth, src.cam, dst_cam, cfg.huber);
  result.set = set;
  return result;
}

Grid<float> disparity_map(const ViewState& src, const Camera& dst_cam,
                          const CorrespondenceSet& set) {
  Grid<float> disp(src.depth.width, src.depth.height, 0.0f);
  std::vector<Pixel> pixels;
  pixels.reserve(set.matches.size());
  for (const auto& m : set.matches) pixels.push_back(m.source);
  ReprojectionField corr_nerf = reproject_correspondences(src.depth, src.cam, dst_cam, pixels);
  for (size_t i = 0; i < set.matches.size(); ++i) {
    if (!corr_nerf.valid[i]) continue;
    const auto& m = set.matches[i];
    disp.at(m.source.x, m.source.y) =
        static_cast<float>((m.target - corr_nerf.points[i]).norm());
  }
  return disp;
}

ViewState make_view_state(const SdfScene& scene, const Camera& cam, const std::string& name,
                          int view_id, DepthMap input, const ExperimentConfig& cfg) {
  ViewState vs;
  vs.name = name;
  vs.cam = cam;
  vs.azimuth_deg = view_azimuth_deg(cam);
  auto [gt_depth, opacity] = render_depth_opacity(scene, cam);
  vs.gt = std::move(gt_depth);
  vs.opacity = std::move(opacity);
  vs.fg_mask = foreground_mask(vs.opacity, cfg.filter);
  vs.features = synthesize_features(scene, cam, vs.gt, cfg.features.spec,
                                    cfg.correction.noise_sigma, cfg.correction.seed, view_id);
  vs.depth = std::move(input);
  vs.initial = vs.depth;
  vs.corrupted = Mask(vs.depth.width, vs.depth.height, 0);
  for (size_t i = 0; i < vs.depth.size(); ++i)
    if (vs.depth.values[i] != vs.gt.values[i]) vs.corrupted.values[i] = 1;
  return vs;
}

PartnerData make_partner(const SdfScene& scene, const ViewState& src, double delta_alpha_deg,
                         int partner_index, const ExperimentConfig& cfg) {
  Intrinsics intr{src.cam.fx, src.cam.fy, src.cam.cx, src.cam.cy, src.cam.width, src.cam.height};
  Camera cam = orbit_camera(src.azimuth_deg + delta_alpha_deg, cfg.rig.elevation, cfg.rig.radius,
                            intr);
  auto [gt_depth, opacity] = render_depth_opacity(scene, cam);
  PartnerData partner;
  partner.cam = cam;
  partner.fg_mask = foreground_mask(opacity, cfg.filter);
  partner.features =
      synthesize_features(scene, cam, gt_depth, cfg.features.spec, cfg.correction.noise_sigma,
                          cfg.correction.seed, 1000 + partner_index);
  return partner;
}

struct ErrorStats {
  double made_corrupted = 0;
  double clean_drift = 0;
  long corrupted_count = 0;
};

ErrorStats compute_error_stats(const std::vector<ViewState>& views) {
  ErrorStats stats;
  double sum_corrupted = 0, sum_clean = 0;
  long n_corrupted = 0, n_clean = 0;
  for (const auto& v : views) {
    for (size_t i = 0; i < v.depth.size(); ++i) {
      if (!is_hit(v.gt.values[i])) continue;
      double err = std::abs(static_cast<double>(v.depth.values[i]) - v.gt.values[i]);
      if (v.corrupted.values[i]) {
        sum_corrupted += err;
        ++n_corrupted;
      } else {
        sum_clean += err;
        ++n_clean;
      }
    }
  }
  stats.made_corrupted = n_corrupted ? sum_corrupted / n_corrupted : 0;
  stats.clean_drift = n_clean ? sum_clean / n_clean : 0;
  stats.corrupted_count = n_corrupted;
  return stats;
}

}  // namespace

double made_reduction_percent(const CorrectionTrace& trace) {
  if (trace.made_initial <= 0) return 0;
  return 100.0 * (trace.made_initial - trace.made_final) / trace.made_initial;
}

CorrectionTrace run_depth_correction(const SdfScene& scene, const CameraRig& rig,
                                     std::vector<DepthMap> corrupted_v1,
                                     std::vector<DepthMap> corrupted_v2,
                                     const ExperimentConfig& cfg) {
  if (static_cast<int>(corrupted_v1.size()) != rig.n_views ||
      static_cast<int>(corrupted_v2.size()) != rig.n_views)
    throw InvalidSpecError("need one corrupted depth map per rig view");
  cfg.schedule.validate();

  const int n = rig.n_views;
  std::vector<ViewState> views;
  views.reserve(2 * n);
  for (int i = 0; i < n; ++i)
    views.push_back(make_view_state(scene, rig.cameras_v1[i], "v1_" + std::to_string(i), i,
                                    std::move(corrupted_v1[i]), cfg));
  for (int i = 0; i < n; ++i)
    views.push_back(make_view_state(scene, rig.cameras_v2[i], "v2_" + std::to_string(i), n + i,
                                    std::move(corrupted_v2[i]), cfg));

  // Natural-pair correspondence sets (v1_i <-> v2_i). Features and cameras do
  // not change during the run, so these are computed once; they drive fixed
  // delta-alpha iterations and checkpoint snapshots.
  std::vector<int> natural_partner(2 * n);
  for (int i = 0; i < n; ++i) {
    natural_partner[i] = n + i;
    natural_partner[n + i] = i;
  }
  std::vector<CorrespondenceSet> natural_sets(2 * n);
  parallel_for(2 * n, [&](int v) {
    const ViewState& src = views[v];
    const ViewState& dst = views[natural_partner[v]];
    natural_sets[v] = correspondence_pipeline(src.features, src.cam, src.fg_mask, dst.features,
                                              dst.cam, dst.fg_mask, cfg);
  });

  CorrectionTrace trace;
  for (const auto& v : views) {
    trace.view_names.push_back(v.name);
    trace.initial_depths.push_back(v.initial);
    trace.gt_depths.push_back(v.gt);
  }
  {
    ErrorStats initial = compute_error_stats(views);
    trace.made_initial = initial.made_corrupted;
    trace.corrupted_pixel_count = static_cast<int>(initial.corrupted_count);
  }

  std::mt19937_64 alpha_rng(cfg.correction.seed ^ 0xA17Au);
  const auto& policy = cfg.correction.delta_alpha;
  const std::vector<int> checkpoints = cfg.output.checkpoints;
  int stalled_streak = 0;

  for (int t = 0; t < cfg.schedule.total_iters; ++t) {
    Mode mode = schedule_mode(cfg.schedule, t);
    IterationRecord record;
    record.iter = t;
    record.mode = mode;
    record.corr_loss = std::numeric_limits<double>::quiet_NaN();
    record.delta_alpha = std::numeric_limits<double>::quiet_NaN();

    if (mode == Mode::kCorr) {
      double delta = policy.resample
                         ? std::uniform_real_distribution<double>(policy.lo, policy.hi)(alpha_rng)
                         : policy.fixed_deg;
      record.delta_alpha = delta;

      std::vector<EvalResult> results(2 * n);
      if (policy.resample) {
        // Per-view partner side, so limb regions invisible from one offset
        // direction still receive corrections from the other.
        std::vector<double> offsets(2 * n);
        for (int v = 0; v < 2 * n; ++v) offsets[v] = (alpha_rng() & 1) ? delta : -delta;
        parallel_for(2 * n, [&](int v) {
          PartnerData partner = make_partner(scene, views[v], offsets[v], v, cfg);
          CorrespondenceSet set =
              correspondence_pipeline(views[v].features, views[v].cam, views[v].fg_mask,
                                      partner.features, partner.cam, partner.fg_mask, cfg);
          results[v] = evaluate_pair(views[v], partner.cam, set, cfg);
        });
      } else {
        parallel_for(2 * n, [&](int v) {
          results[v] =
              evaluate_pair(views[v], views[natural_partner[v]].cam, natural_sets[v], cfg);
        });
      }

      double loss = 0;
      int matches = 0;
      const double step = cfg.correction.learning_rate * cfg.correction.lambda_corr;
      for (int v = 0; v < 2 * n; ++v) {
        loss += results[v].report.total;
        matches += results[v].report.n_active;
        auto& depth = views[v].depth;
        const auto& grad = results[v].report.grad_depth;
        for (size_t i = 0; i < depth.size(); ++i)
          depth.values[i] = static_cast<float>(depth.values[i] - step * grad.values[i]);
      }
      record.corr_loss = loss;
      record.n_matches = matches;

      if (matches == 0) {
        if (++stalled_streak >= 50) {
          std::ostringstream diag;
          diag << "no surviving matches for " << stalled_streak
               << " consecutive CORR iterations (t=" << t << "); per-view stage counts:";
          for (int v = 0; v < 2 * n; ++v) {
            const auto& s = results[v].set.stats;
            diag << " " << views[v].name << "[in=" << s.input << ",src=" << s.after_source_mask
                 << ",tgt=" << s.after_target_mask << ",epi=" << s.after_epipolar
                 << ",bounds=" << s.after_bounds << "]";
          }
          throw StalledCorrectionError(diag.str());
        }
      } else {
        stalled_streak = 0;
      }
    } else if (cfg.correction.lambda_sds_proxy > 0) {
      // Prior hook: pull toward the initial maps under the proxy weight.
      const double step = cfg.correction.learning_rate * cfg.correction.lambda_sds_proxy;
      for (auto& v : views)
        for (size_t i = 0; i < v.depth.size(); ++i)
          v.depth.values[i] = static_cast<float>(
              v.depth.values[i] - step * (v.depth.values[i] - v.initial.values[i]));
    }

    ErrorStats stats = compute_error_stats(views);
    record.made_corrupted = stats.made_corrupted;
    record.clean_drift = stats.clean_drift;
    trace.iterations.push_back(record);

    if (std::find(checkpoints.begin(), checkpoints.end(), t) != checkpoints.end()) {
      for (int v = 0; v < 2 * n; ++v) {
        ResidualSnapshot snap;
        snap.iter = t;
        snap.src_name = views[v].name;
        snap.dst_name = views[natural_partner[v]].name;
        snap.disparity = disparity_map(views[v], views[natural_partner[v]].cam, natural_sets[v]);
        trace.snapshots.push_back(std::move(snap));
      }
    }
  }

  for (const auto& v : views) trace.final_depths.push_back(v.depth);
  ErrorStats final_stats = compute_error_stats(views);
  trace.made_final = final_stats.made_corrupted;
  trace.clean_drift_final = final_stats.clean_drift;
  return trace;
}

CorrectionTrace run_experiment(const ExperimentConfig& cfg) {
  CameraRig rig = build_rig(cfg.rig.n, cfg.rig.delta_alpha, cfg.rig.radius, cfg.rig.elevation,
                            cfg.rig.intrinsics(), cfg.rig.seed);
  std::vector<DepthMap> v1, v2;
  for (int i = 0; i < rig.n_views; ++i) {
    for (int set = 0; set < 2; ++set) {
      const Camera& cam = set == 0 ? rig.cameras_v1[i] : rig.cameras_v2[i];
      auto [depth, opacity] = render_depth_opacity(cfg.scene, cam);
      bool corrupt = cfg.infidelity.views == "both" ||
                     (set == 0 && cfg.infidelity.views == "v1") ||
                     (set == 1 && cfg.infidelity.views == "v2");
      if (corrupt) {
        auto [bad, blob] = inject_infidelity(cfg.scene, cam, depth, opacity, cfg.infidelity.kind,
                                             cfg.infidelity.mask_fraction, cfg.infidelity.magnitude,
                                             cfg.infidelity.seed + i + (set ? 100 : 0));
        depth = std::move(bad);
      }
      (set == 0 ? v1 : v2).push_back(std::move(depth));
    }
  }
  return run_depth_correction(cfg.scene, rig, std::move(v1), std::move(v2), cfg);
}

void emit_trace(const CorrectionTrace& trace, const std::string& dir, double heatmap_clip) {
  if (trace.iterations.empty()) throw InvalidSpecError("trace is empty");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);

  JsonNode metrics = JsonNode::object();
  JsonNode iters = JsonNode::array();
  for (const auto& rec : trace.iterations) {
    JsonNode r = JsonNode::object();
    r["iter"] = JsonNode(rec.iter);
    r["mode"] = JsonNode(rec.mode == Mode::kCorr ? "corr" : "sds");
    r["loss"] = std::isnan(rec.corr_loss) ? JsonNode() : JsonNode(rec.corr_loss);
    r["matches"] = JsonNode(rec.n_matches);
    r["made_corrupted"] = JsonNode(rec.made_corrupted);
    r["clean_drift"] = JsonNode(rec.clean_drift);
    r["delta_alpha"] = std::isnan(rec.delta_alpha) ? JsonNode() : JsonNode(rec.delta_alpha);
    iters.push_back(std::move(r));
  }
  metrics["iterations"] = std::move(iters);
  JsonNode summary = JsonNode::object();
  summary["made_initial"] = JsonNode(trace.made_initial);
  summary["made_final"] = JsonNode(trace.made_final);
  summary["made_reduction_percent"] = JsonNode(made_reduction_percent(trace));
  summary["clean_drift_final"] = JsonNode(trace.clean_drift_final);
  summary["corrupted_pixels"] = JsonNode(trace.corrupted_pixel_count);
  metrics["summary"] = std::move(summary);
  write_text_file(dir + "/metrics.json", metrics.dump(2) + "\n");

  for (const auto& snap : trace.snapshots) {
    Grid<uint16_t> img(snap.disparity.width, snap.disparity.height, 0);
    for (size_t i = 0; i < img.size(); ++i) {
      double v = std::min(1.0, snap.disparity.values[i] / heatmap_clip);
      img.values[i] = static_cast<uint16_t>(std::lround(v * 65535.0));
    }
    char name[128];
    std::snprintf(name, sizeof(name), "heatmap_%s_to_%s_iter%06d.pgm", snap.src_name.c_str(),
                  snap.dst_name.c_str(), snap.iter);
    write_pgm16(dir + "/" + name, img);
  }

  for (size_t v = 0; v < trace.view_names.size(); ++v) {
    write_pfm(dir + "/depth_before_" + trace.view_names[v] + ".pfm", trace.initial_depths[v]);
    write_pfm(dir + "/depth_after_" + trace.view_names[v] + ".pfm", trace.final_depths[v]);
    write_pfm(dir + "/depth_gt_" + trace.view_names[v] + ".pfm", trace.gt_depths[v]);
  }
}

}  // namespace corrview
