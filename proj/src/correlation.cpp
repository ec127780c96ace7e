#include "corrview/correlation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>

#include "corrview/errors.hpp"

namespace corrview {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

FeatureLayer resample_layer(const FeatureLayer& layer, int h_out, int w_out) {
  if (layer.height == h_out && layer.width == w_out) return layer;

  FeatureLayer out;
  out.layer_id = layer.layer_id;
  out.height = h_out;
  out.width = w_out;
  out.channels = layer.channels;
  out.values.resize(static_cast<size_t>(h_out) * w_out * layer.channels);

  auto src_coord = [](int i, int n_out, int n_in) {
    if (n_out == 1) return 0.0;
    return static_cast<double>(i) * (n_in - 1) / (n_out - 1);
  };

  for (int y = 0; y < h_out; ++y) {
    double sy = src_coord(y, h_out, layer.height);
    int y0 = std::min(static_cast<int>(sy), layer.height - 1);
    int y1 = std::min(y0 + 1, layer.height - 1);
    double wy = sy - y0;
    for (int x = 0; x < w_out; ++x) {
      double sx = src_coord(x, w_out, layer.width);
      int x0 = std::min(static_cast<int>(sx), layer.width - 1);
      int x1 = std::min(x0 + 1, layer.width - 1);
      double wx = sx - x0;
      const float* p00 = layer.pixel(x0, y0);
      const float* p01 = layer.pixel(x1, y0);
      const float* p10 = layer.pixel(x0, y1);
      const float* p11 = layer.pixel(x1, y1);
      float* dst = out.pixel(x, y);
      for (int c = 0; c < layer.channels; ++c) {
        double top = p00[c] + (p01[c] - p00[c]) * wx;
        double bot = p10[c] + (p11[c] - p10[c]) * wx;
        dst[c] = static_cast<float>(top + (bot - top) * wy);
      }
    }
  }
  return out;
}

/// Row-normalized (n x c) feature matrix; zero-norm rows stay zero.
RowMajorMatrix normalized_matrix(const FeatureLayer& layer) {
  const int n = layer.height * layer.width;
  RowMajorMatrix m(n, layer.channels);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < layer.channels; ++c)
      m(i, c) = layer.values[static_cast<size_t>(i) * layer.channels + c];
  for (int i = 0; i < n; ++i) {
    double norm = m.row(i).norm();
    if (norm > 0) m.row(i) /= norm;
  }
  return m;
}

/// Zero-padded sliding-window sum along one dimension of the (h,w,h,w) tensor.
void box_sum_along(const std::vector<double>& in, std::vector<double>& out,
                   const std::array<int, 4>& shape, int dim, int hk) {
  std::array<size_t, 4> stride;
  stride[3] = 1;
  for (int d = 2; d >= 0; --d) stride[d] = stride[d + 1] * shape[d + 1];

  std::array<int, 3> other;
  int oi = 0;
  for (int d = 0; d < 4; ++d)
    if (d != dim) other[oi++] = d;

  const int n = shape[dim];
  const size_t st = stride[dim];
  for (int a = 0; a < shape[other[0]]; ++a)
    for (int b = 0; b < shape[other[1]]; ++b)
      for (int c = 0; c < shape[other[2]]; ++c) {
        size_t base = a * stride[other[0]] + b * stride[other[1]] + c * stride[other[2]];
        double acc = 0;
        for (int i = 0; i <= std::min(hk, n - 1); ++i) acc += in[base + i * st];
        for (int i = 0; i < n; ++i) {
          out[base + i * st] = acc;
          int add = i + hk + 1, sub = i - hk;
          if (add < n) acc += in[base + add * st];
          if (sub >= 0) acc -= in[base + sub * st];
        }
      }
}

int window_count(int i, int n, int hk) {
  return std::min(i + hk, n - 1) - std::max(i - hk, 0) + 1;
}

}  // namespace

FeatureStack interpolate_features(const FeatureStack& stack, int h_out, int w_out) {
  if (stack.layers.empty()) throw EmptyInputError("feature stack has no layers");
  if (h_out < 1 || w_out < 1) throw InvalidSpecError("output dims must be >= 1");
  FeatureStack out;
  out.view_id = stack.view_id;
  out.layers.reserve(stack.layers.size());
  for (const auto& layer : stack.layers) out.layers.push_back(resample_layer(layer, h_out, w_out));
  return out;
}

CorrelationVolume build_correlation(const FeatureStack& src, const FeatureStack& dst,
                                    int h_common, int w_common) {
  if (src.layers.empty() || dst.layers.empty())
    throw EmptyInputError("feature stacks must be non-empty");
  if (src.layers.size() != dst.layers.size())
    throw LayerMismatchError("feature stacks have different layer counts");
  for (size_t l = 0; l < src.layers.size(); ++l)
    if (src.layers[l].layer_id != dst.layers[l].layer_id)
      throw LayerMismatchError("feature stacks have different layer ids");
  if (h_common * w_common > kMaxVolumePixels)
    throw CapacityError("dense volume capped at H'*W' <= 64*64");

  const int n = h_common * w_common;
  CorrelationVolume vol;
  vol.h = h_common;
  vol.w = w_common;
  vol.layer_count = static_cast<int>(src.layers.size());
  vol.pair_id = {src.view_id, dst.view_id};
  vol.values.assign(static_cast<size_t>(n) * n, 0.0);

  Eigen::Map<RowMajorMatrix> acc(vol.values.data(), n, n);
  for (size_t l = 0; l < src.layers.size(); ++l) {
    RowMajorMatrix fs = normalized_matrix(resample_layer(src.layers[l], h_common, w_common));
    RowMajorMatrix fd = normalized_matrix(resample_layer(dst.layers[l], h_common, w_common));
    acc.noalias() += fs * fd.transpose();
  }
  return vol;
}

CorrelationVolume normalize_to_unit_range(const CorrelationVolume& vol) {
  CorrelationVolume out = vol;
  const double span = 2.0 * vol.layer_count;
  for (double& v : out.values) v = (v + vol.layer_count) / span;
  out.unit_range = true;
  return out;
}

CorrelationVolume mutual_nn_filter(const CorrelationVolume& vol) {
  const int n = vol.pixels();
  for (double v : vol.values)
    if (v < 0) throw InvalidSpecError("mutual_nn_filter requires non-negative entries");

  // Best score per target pixel (over sources) and per source pixel (over targets).
  std::vector<double> max_per_target(n, 0.0), max_per_source(n, 0.0);
  for (int sp = 0; sp < n; ++sp) {
    const double* row = vol.values.data() + static_cast<size_t>(sp) * n;
    double best = 0;
    for (int tp = 0; tp < n; ++tp) {
      best = std::max(best, row[tp]);
      max_per_target[tp] = std::max(max_per_target[tp], row[tp]);
    }
    max_per_source[sp] = best;
  }

  CorrelationVolume out = vol;
  for (int sp = 0; sp < n; ++sp) {
    double* row = out.values.data() + static_cast<size_t>(sp) * n;
    const double ms = max_per_source[sp];
    for (int tp = 0; tp < n; ++tp) {
      const double mt = max_per_target[tp];
      if (ms <= 0 || mt <= 0) {
        row[tp] = 0;
        continue;
      }
      double r_src = row[tp] / mt;
      double r_dst = row[tp] / ms;
      row[tp] = r_src * r_dst * row[tp];
    }
  }
  return out;
}

CorrelationVolume smooth_4d(const CorrelationVolume& vol, int k, SmoothNorm norm) {
  if (k < 1 || k % 2 == 0) throw InvalidKernelError("kernel size must be odd and >= 1");
  if (k == 1) return vol;

  const std::array<int, 4> shape{vol.h, vol.w, vol.h, vol.w};
  const int hk = k / 2;

  std::vector<double> sums = vol.values;
  std::vector<double> tmp(sums.size());
  for (int dim = 0; dim < 4; ++dim) {
    box_sum_along(sums, tmp, shape, dim, hk);
    sums.swap(tmp);
  }

  CorrelationVolume out = vol;
  const double k4 = static_cast<double>(k) * k * k * k;
  const double k3 = static_cast<double>(k) * k * k;
  size_t idx = 0;
  for (int p = 0; p < vol.h; ++p) {
    int cp = window_count(p, vol.h, hk);
    for (int q = 0; q < vol.w; ++q) {
      int cq = window_count(q, vol.w, hk);
      for (int r = 0; r < vol.h; ++r) {
        int cr = window_count(r, vol.h, hk);
        for (int s = 0; s < vol.w; ++s, ++idx) {
          double count = static_cast<double>(cp) * cq * cr * window_count(s, vol.w, hk);
          switch (norm) {
            case SmoothNorm::kMassPreserving:
              out.values[idx] = vol.values[idx] + (sums[idx] - count * vol.values[idx]) / k4;
              break;
            case SmoothNorm::kCountMean:
              out.values[idx] = sums[idx] / count;
              break;
            case SmoothNorm::kUniformK3:
              out.values[idx] = sums[idx] / k3;
              break;
          }
        }
      }
    }
  }
  return out;
}

RawCorrespondenceField extract_correspondences(const CorrelationVolume& vol) {
  const int n = vol.pixels();
  RawCorrespondenceField field;
  field.h = vol.h;
  field.w = vol.w;
  field.pair_id = vol.pair_id;
  field.target.resize(n);
  field.confidence.resize(n);
  for (int sp = 0; sp < n; ++sp) {
    const double* row = vol.values.data() + static_cast<size_t>(sp) * n;
    int best = 0;
    double best_val = row[0];
    for (int tp = 1; tp < n; ++tp) {
      if (row[tp] > best_val) {
        best_val = row[tp];
        best = tp;
      }
    }
    field.target[sp] = Pixel{best % vol.w, best / vol.w};
    field.confidence[sp] = best_val;
  }
  return field;
}

}  // namespace corrview
