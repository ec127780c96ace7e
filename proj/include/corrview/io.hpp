#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "corrview/camera.hpp"
#include "corrview/correlation.hpp"
#include "corrview/match_filter.hpp"
#include "corrview/types.hpp"

namespace corrview {

/// Minimal JSON document builder with insertion-ordered object keys and
/// 17-significant-digit doubles, so emitted files are byte-stable.
class JsonNode {
 public:
  JsonNode() = default;
  static JsonNode object();
  static JsonNode array();
  JsonNode(bool v);
  JsonNode(int v);
  JsonNode(int64_t v);
  JsonNode(uint64_t v);
  JsonNode(double v);
  JsonNode(const char* v);
  JsonNode(std::string v);

  JsonNode& operator[](const std::string& key);  // object insert-or-get
  void push_back(JsonNode v);                    // array append

  std::string dump(int indent = -1) const;

 private:
  enum class Kind { kNull, kBool, kInt, kDouble, kString, kArray, kObject };
  Kind kind_ = Kind::kNull;
  bool bool_ = false;
  int64_t int_ = 0;
  double double_ = 0;
  std::string string_;
  std::vector<JsonNode> items_;
  std::vector<std::pair<std::string, JsonNode>> members_;

  void write(std::string& out, int indent, int depth) const;
};

std::string format_json_double(double v);

// ---- binary image / tensor formats ----

/// Grayscale PFM ("Pf"), little-endian (scale -1.0), bottom-up scanlines.
void write_pfm(const std::string& path, const Grid<float>& map);
Grid<float> read_pfm(const std::string& path);

/// Binary PGM (P5) with maxval 65535, big-endian samples.
void write_pgm16(const std::string& path, const Grid<uint16_t>& img);
Grid<uint16_t> read_pgm16(const std::string& path);

/// CVFS container: magic "CVFS", u32 layer count, per layer u32 x4
/// (layer_id, H, W, C), then f32 row-major channels-last data. All
/// little-endian.
void write_cvfs(const std::string& path, const FeatureStack& stack);
FeatureStack read_cvfs(const std::string& path, int view_id = 0);

/// Debug export of a correlation volume as a single CVFS layer of shape
/// (H'*W', H'*W') with one channel.
void write_volume_cvfs(const std::string& path, const CorrelationVolume& vol);

// ---- camera / rig JSON ----

JsonNode camera_to_json(const Camera& cam);
Camera camera_from_json_text(const std::string& text);
void write_rig_json(const std::string& path, const CameraRig& rig);
CameraRig read_rig_json(const std::string& path);

// ---- correspondence files ----

/// One line per match: {"sp":[q,p],"tp":[s,r],"conf":x,"mask":bits}.
void write_correspondences_jsonl(const std::string& path, const CorrespondenceSet& set);
CorrespondenceSet read_correspondences_jsonl(const std::string& path);

/// One line per source pixel: {"p":..,"q":..,"r":..,"s":..,"conf":..}.
void write_raw_field_jsonl(const std::string& path, const RawCorrespondenceField& field);

// ---- helpers ----

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace corrview
