#pragma once

#include <cstdint>
#include <vector>

namespace corrview {

/// Integer pixel position. x is the column, y the row.
struct Pixel {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Dense row-major 2D grid, values[y*width + x].
template <typename T>
struct Grid {
  int width = 0;
  int height = 0;
  std::vector<T> values;

  Grid() = default;
  Grid(int w, int h, T fill = T{}) : width(w), height(h), values(static_cast<size_t>(w) * h, fill) {}

  T& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
  const T& at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
  size_t size() const { return values.size(); }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
};

/// Per-pixel depth in world units (camera-frame Z). kNoHitDepth marks misses.
using DepthMap = Grid<float>;
/// Per-pixel opacity in [0,1].
using OpacityMap = Grid<float>;
using Mask = Grid<uint8_t>;

inline constexpr float kNoHitDepth = 0.0f;
inline bool is_hit(float depth) { return depth > 0.0f; }

/// One feature map: channels-last layout, values[(y*width + x)*channels + c].
struct FeatureLayer {
  int layer_id = 0;
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> values;

  const float* pixel(int x, int y) const {
    return values.data() + (static_cast<size_t>(y) * width + x) * channels;
  }
  float* pixel(int x, int y) {
    return values.data() + (static_cast<size_t>(y) * width + x) * channels;
  }
};

/// Multi-layer feature maps for a single view.
struct FeatureStack {
  int view_id = 0;
  std::vector<FeatureLayer> layers;
};

}  // namespace corrview
