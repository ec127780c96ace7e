#include "corrview/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "corrview/errors.hpp"

namespace corrview {

// ---------------------------------------------------------------- JsonNode

JsonNode JsonNode::object() {
  JsonNode n;
  n.kind_ = Kind::kObject;
  return n;
}

JsonNode JsonNode::array() {
  JsonNode n;
  n.kind_ = Kind::kArray;
  return n;
}

JsonNode::JsonNode(bool v) : kind_(Kind::kBool), bool_(v) {}
JsonNode::JsonNode(int v) : kind_(Kind::kInt), int_(v) {}
JsonNode::JsonNode(int64_t v) : kind_(Kind::kInt), int_(v) {}
JsonNode::JsonNode(uint64_t v) : kind_(Kind::kInt), int_(static_cast<int64_t>(v)) {}
JsonNode::JsonNode(double v) : kind_(Kind::kDouble), double_(v) {}
JsonNode::JsonNode(const char* v) : kind_(Kind::kString), string_(v) {}
JsonNode::JsonNode(std::string v) : kind_(Kind::kString), string_(std::move(v)) {}

JsonNode& JsonNode::operator[](const std::string& key) {
  if (kind_ == Kind::kNull) kind_ = Kind::kObject;
  for (auto& [k, v] : members_)
    if (k == key) return v;
  members_.emplace_back(key, JsonNode());
  return members_.back().second;
}

void JsonNode::push_back(JsonNode v) {
  if (kind_ == Kind::kNull) kind_ = Kind::kArray;
  items_.push_back(std::move(v));
}

std::string format_json_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {
void escape_json_string(const std::string& s, std::string& out) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}
}  // namespace

void JsonNode::write(std::string& out, int indent, int depth) const {
  auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<size_t>(indent) * d, ' ');
  };
  switch (kind_) {
    case Kind::kNull: out += "null"; break;
    case Kind::kBool: out += bool_ ? "true" : "false"; break;
    case Kind::kInt: out += std::to_string(int_); break;
    case Kind::kDouble: out += format_json_double(double_); break;
    case Kind::kString: escape_json_string(string_, out); break;
    case Kind::kArray: {
      out += '[';
      for (size_t i = 0; i < items_.size(); ++i) {
        if (i) out += ',';
        if (indent >= 0 && items_.size() > 8) newline(depth + 1);
        items_[i].write(out, indent, depth + 1);
      }
      if (indent >= 0 && items_.size() > 8) newline(depth);
      out += ']';
      break;
    }
    case Kind::kObject: {
      out += '{';
      for (size_t i = 0; i < members_.size(); ++i) {
        if (i) out += ',';
        newline(depth + 1);
        escape_json_string(members_[i].first, out);
        out += indent >= 0 ? ": " : ":";
        members_[i].second.write(out, indent, depth + 1);
      }
      newline(depth);
      out += '}';
      break;
    }
  }
}

std::string JsonNode::dump(int indent) const {
  std::string out;
  write(out, indent, 0);
  return out;
}

// ---------------------------------------------------------------- raw file helpers

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

namespace {

void put_u32_le(std::string& out, uint32_t v) {
  out += static_cast<char>(v & 0xff);
  out += static_cast<char>((v >> 8) & 0xff);
  out += static_cast<char>((v >> 16) & 0xff);
  out += static_cast<char>((v >> 24) & 0xff);
}

void put_f32_le(std::string& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32_le(out, bits);
}

uint32_t get_u32_le(const std::string& data, size_t& pos) {
  if (pos + 4 > data.size()) throw FormatError("truncated binary file");
  uint32_t v = static_cast<uint8_t>(data[pos]) | (static_cast<uint8_t>(data[pos + 1]) << 8) |
               (static_cast<uint8_t>(data[pos + 2]) << 16) |
               (static_cast<uint8_t>(data[pos + 3]) << 24);
  pos += 4;
  return v;
}

float get_f32_le(const std::string& data, size_t& pos) {
  uint32_t bits = get_u32_le(data, pos);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace

// ---------------------------------------------------------------- PFM

void write_pfm(const std::string& path, const Grid<float>& map) {
  std::string out = "Pf\n" + std::to_string(map.width) + " " + std::to_string(map.height) +
                    "\n-1.0\n";
  out.reserve(out.size() + map.size() * 4);
  for (int y = map.height - 1; y >= 0; --y)  // PFM scanlines run bottom to top
    for (int x = 0; x < map.width; ++x) put_f32_le(out, map.at(x, y));
  write_text_file(path, out);
}

Grid<float> read_pfm(const std::string& path) {
  std::string data = read_text_file(path);
  std::istringstream header(data);
  std::string magic;
  int w = 0, h = 0;
  double scale = 0;
  header >> magic >> w >> h >> scale;
  if (magic != "Pf") throw FormatError("not a grayscale PFM: " + path);
  if (w < 1 || h < 1) throw FormatError("bad PFM dims: " + path);
  if (scale >= 0) throw FormatError("big-endian PFM not supported: " + path);
  size_t pos = static_cast<size_t>(header.tellg()) + 1;  // single whitespace after scale

  Grid<float> map(w, h);
  for (int y = h - 1; y >= 0; --y)
    for (int x = 0; x < w; ++x) map.at(x, y) = get_f32_le(data, pos);
  return map;
}

// ---------------------------------------------------------------- PGM16

void write_pgm16(const std::string& path, const Grid<uint16_t>& img) {
  std::string out =
      "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n65535\n";
  out.reserve(out.size() + img.size() * 2);
  for (uint16_t v : img.values) {  // most significant byte first per Netpbm
    out += static_cast<char>(v >> 8);
    out += static_cast<char>(v & 0xff);
  }
  write_text_file(path, out);
}

Grid<uint16_t> read_pgm16(const std::string& path) {
  std::string data = read_text_file(path);
  std::istringstream header(data);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  header >> magic >> w >> h >> maxval;
  if (magic != "P5" || maxval != 65535) throw FormatError("not a 16-bit binary PGM: " + path);
  size_t pos = static_cast<size_t>(header.tellg()) + 1;
  if (pos + static_cast<size_t>(w) * h * 2 > data.size()) throw FormatError("truncated PGM: " + path);

  Grid<uint16_t> img(w, h);
  for (auto& v : img.values) {
    v = static_cast<uint16_t>((static_cast<uint8_t>(data[pos]) << 8) |
                              static_cast<uint8_t>(data[pos + 1]));
    pos += 2;
  }
  return img;
}

// ---------------------------------------------------------------- CVFS

void write_cvfs(const std::string& path, const FeatureStack& stack) {
  std::string out = "CVFS";
  put_u32_le(out, static_cast<uint32_t>(stack.layers.size()));
  for (const auto& layer : stack.layers) {
    put_u32_le(out, static_cast<uint32_t>(layer.layer_id));
    put_u32_le(out, static_cast<uint32_t>(layer.height));
    put_u32_le(out, static_cast<uint32_t>(layer.width));
    put_u32_le(out, static_cast<uint32_t>(layer.channels));
    for (float v : layer.values) put_f32_le(out, v);
  }
  write_text_file(path, out);
}

FeatureStack read_cvfs(const std::string& path, int view_id) {
  std::string data = read_text_file(path);
  if (data.size() < 8 || data.compare(0, 4, "CVFS") != 0)
    throw FormatError("not a CVFS file: " + path);
  size_t pos = 4;
  uint32_t count = get_u32_le(data, pos);

  FeatureStack stack;
  stack.view_id = view_id;
  stack.layers.reserve(count);
  for (uint32_t l = 0; l < count; ++l) {
    FeatureLayer layer;
    layer.layer_id = static_cast<int>(get_u32_le(data, pos));
    layer.height = static_cast<int>(get_u32_le(data, pos));
    layer.width = static_cast<int>(get_u32_le(data, pos));
    layer.channels = static_cast<int>(get_u32_le(data, pos));
    size_t n = static_cast<size_t>(layer.height) * layer.width * layer.channels;
    layer.values.resize(n);
    for (auto& v : layer.values) v = get_f32_le(data, pos);
    stack.layers.push_back(std::move(layer));
  }
  return stack;
}

void write_volume_cvfs(const std::string& path, const CorrelationVolume& vol) {
  FeatureStack stack;
  FeatureLayer layer;
  layer.layer_id = 0;
  layer.height = vol.pixels();
  layer.width = vol.pixels();
  layer.channels = 1;
  layer.values.assign(vol.values.begin(), vol.values.end());
  stack.layers.push_back(std::move(layer));
  write_cvfs(path, stack);
}

// ---------------------------------------------------------------- camera / rig JSON

JsonNode camera_to_json(const Camera& cam) {
  JsonNode node = JsonNode::object();
  node["fx"] = JsonNode(cam.fx);
  node["fy"] = JsonNode(cam.fy);
  node["cx"] = JsonNode(cam.cx);
  node["cy"] = JsonNode(cam.cy);
  JsonNode rot = JsonNode::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rot.push_back(JsonNode(cam.rotation(r, c)));
  node["rotation"] = std::move(rot);
  JsonNode tr = JsonNode::array();
  for (int i = 0; i < 3; ++i) tr.push_back(JsonNode(cam.translation(i)));
  node["translation"] = std::move(tr);
  node["width"] = JsonNode(cam.width);
  node["height"] = JsonNode(cam.height);
  return node;
}

namespace {

Camera camera_from_nlohmann(const nlohmann::json& j) {
  Camera cam;
  cam.fx = j.at("fx").get<double>();
  cam.fy = j.at("fy").get<double>();
  cam.cx = j.at("cx").get<double>();
  cam.cy = j.at("cy").get<double>();
  auto rot = j.at("rotation");
  if (!rot.is_array() || rot.size() != 9) throw FormatError("rotation must hold 9 numbers");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) cam.rotation(r, c) = rot[r * 3 + c].get<double>();
  auto tr = j.at("translation");
  if (!tr.is_array() || tr.size() != 3) throw FormatError("translation must hold 3 numbers");
  for (int i = 0; i < 3; ++i) cam.translation(i) = tr[i].get<double>();
  cam.width = j.at("width").get<int>();
  cam.height = j.at("height").get<int>();
  cam.validate();
  return cam;
}

}  // namespace

Camera camera_from_json_text(const std::string& text) {
  try {
    return camera_from_nlohmann(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("camera JSON: ") + e.what());
  }
}

void write_rig_json(const std::string& path, const CameraRig& rig) {
  JsonNode node = JsonNode::object();
  node["n"] = JsonNode(rig.n_views);
  node["delta_alpha"] = JsonNode(rig.delta_alpha);
  JsonNode v1 = JsonNode::array(), v2 = JsonNode::array();
  for (const auto& cam : rig.cameras_v1) v1.push_back(camera_to_json(cam));
  for (const auto& cam : rig.cameras_v2) v2.push_back(camera_to_json(cam));
  node["v1"] = std::move(v1);
  node["v2"] = std::move(v2);
  write_text_file(path, node.dump(2) + "\n");
}

CameraRig read_rig_json(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("rig JSON: ") + e.what());
  }
  CameraRig rig;
  try {
    rig.n_views = j.at("n").get<int>();
    rig.delta_alpha = j.at("delta_alpha").get<double>();
    for (const auto& cj : j.at("v1")) rig.cameras_v1.push_back(camera_from_nlohmann(cj));
    for (const auto& cj : j.at("v2")) rig.cameras_v2.push_back(camera_from_nlohmann(cj));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("rig JSON: ") + e.what());
  }
  if (static_cast<int>(rig.cameras_v1.size()) != rig.n_views ||
      static_cast<int>(rig.cameras_v2.size()) != rig.n_views)
    throw FormatError("rig JSON: view counts disagree with n");
  if (rig.n_views > 0) {
    Eigen::Vector3d c = rig.cameras_v1[0].center();
    rig.radius = c.norm();
    rig.elevation = std::asin(c.z() / c.norm()) * 180.0 / 3.14159265358979323846;
  }
  return rig;
}

// ---------------------------------------------------------------- correspondences

void write_correspondences_jsonl(const std::string& path, const CorrespondenceSet& set) {
  std::string out;
  for (const auto& m : set.matches) {
    out += "{\"sp\":[" + std::to_string(m.source.x) + "," + std::to_string(m.source.y) +
           "],\"tp\":[" + format_json_double(m.target.x()) + "," +
           format_json_double(m.target.y()) + "],\"conf\":" + format_json_double(m.confidence) +
           ",\"mask\":" + std::to_string(m.provenance) + "}\n";
  }
  write_text_file(path, out);
}

CorrespondenceSet read_correspondences_jsonl(const std::string& path) {
  CorrespondenceSet set;
  std::istringstream lines(read_text_file(path));
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      Match m;
      m.source = Pixel{j.at("sp")[0].get<int>(), j.at("sp")[1].get<int>()};
      m.target = Eigen::Vector2d(j.at("tp")[0].get<double>(), j.at("tp")[1].get<double>());
      m.confidence = j.at("conf").get<double>();
      m.provenance = j.at("mask").get<uint32_t>();
      set.matches.push_back(m);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("correspondence JSONL: ") + e.what());
    }
  }
  return set;
}

void write_raw_field_jsonl(const std::string& path, const RawCorrespondenceField& field) {
  std::string out;
  for (size_t i = 0; i < field.target.size(); ++i) {
    int p = static_cast<int>(i) / field.w, q = static_cast<int>(i) % field.w;
    out += "{\"p\":" + std::to_string(p) + ",\"q\":" + std::to_string(q) +
           ",\"r\":" + std::to_string(field.target[i].y) +
           ",\"s\":" + std::to_string(field.target[i].x) +
           ",\"conf\":" + format_json_double(field.confidence[i]) + "}\n";
  }
  write_text_file(path, out);
}

}  // namespace corrview
