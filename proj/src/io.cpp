// Copyright 2026 The regal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "regal/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace regal {
namespace {

using json = nlohmann::json;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

template <typename T>
T from_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    auto* b = reinterpret_cast<unsigned char*>(&v);
    std::reverse(b, b + sizeof(T));
  }
  return v;
}

template <typename T>
void put_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.append(buf, sizeof(T));
}

// --- OBJ -------------------------------------------------------------------

long parse_obj_index(std::string_view token, long vertex_count, std::size_t face_number) {
  const auto slash = token.find('/');
  if (slash != std::string_view::npos) token = token.substr(0, slash);
  long idx = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), idx);
  if (ec != std::errc() || ptr != token.data() + token.size() || idx == 0)
    fail(ErrorCode::Parse, "face " + std::to_string(face_number) + ": bad vertex index '" +
                               std::string(token) + "'");
  // Negative indices are relative to the vertices read so far.
  return idx > 0 ? idx - 1 : vertex_count + idx;
}

// --- PLY -------------------------------------------------------------------

enum class PlyType { Char, UChar, Short, UShort, Int, UInt, Float, Double };

PlyType ply_type(const std::string& name) {
  static const std::map<std::string, PlyType> types = {
      {"char", PlyType::Char},     {"int8", PlyType::Char},     {"uchar", PlyType::UChar},
      {"uint8", PlyType::UChar},   {"short", PlyType::Short},   {"int16", PlyType::Short},
      {"ushort", PlyType::UShort}, {"uint16", PlyType::UShort}, {"int", PlyType::Int},
      {"int32", PlyType::Int},     {"uint", PlyType::UInt},     {"uint32", PlyType::UInt},
      {"float", PlyType::Float},   {"float32", PlyType::Float}, {"double", PlyType::Double},
      {"float64", PlyType::Double}};
  auto it = types.find(name);
  if (it == types.end()) fail(ErrorCode::Parse, "unknown PLY property type '" + name + "'");
  return it->second;
}

std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::Char:
    case PlyType::UChar: return 1;
    case PlyType::Short:
    case PlyType::UShort: return 2;
    case PlyType::Int:
    case PlyType::UInt:
    case PlyType::Float: return 4;
    case PlyType::Double: return 8;
  }
  return 0;
}

double ply_read(PlyType t, const char* p) {
  switch (t) {
    case PlyType::Char: return from_le<std::int8_t>(p);
    case PlyType::UChar: return from_le<std::uint8_t>(p);
    case PlyType::Short: return from_le<std::int16_t>(p);
    case PlyType::UShort: return from_le<std::uint16_t>(p);
    case PlyType::Int: return from_le<std::int32_t>(p);
    case PlyType::UInt: return from_le<std::uint32_t>(p);
    case PlyType::Float: return from_le<float>(p);
    case PlyType::Double: return from_le<double>(p);
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  bool is_list = false;
  PlyType count_type = PlyType::UChar;
  PlyType type = PlyType::Float;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

struct PlyData {
  TriangleMesh mesh;
  std::vector<double> error;
};

PlyData parse_ply(const std::string& data) {
  std::size_t header_end = data.find("end_header");
  if (data.rfind("ply", 0) != 0 || header_end == std::string::npos)
    fail(ErrorCode::Parse, "not a PLY file");
  std::size_t body = data.find('\n', header_end);
  if (body == std::string::npos) fail(ErrorCode::Parse, "PLY header not terminated");
  ++body;

  std::istringstream header(data.substr(0, header_end));
  std::vector<PlyElement> elements;
  std::string line;
  bool binary_le = false;
  while (std::getline(header, line)) {
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "format") {
      std::string fmt;
      ls >> fmt;
      binary_le = fmt == "binary_little_endian";
      if (!binary_le) fail(ErrorCode::Parse, "unsupported PLY format '" + fmt + "' (binary_little_endian only)");
    } else if (kw == "element") {
      PlyElement e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (kw == "property") {
      if (elements.empty()) fail(ErrorCode::Parse, "PLY property before any element");
      PlyProperty p;
      std::string t;
      ls >> t;
      if (t == "list") {
        std::string ct, it;
        ls >> ct >> it >> p.name;
        p.is_list = true;
        p.count_type = ply_type(ct);
        p.type = ply_type(it);
      } else {
        p.type = ply_type(t);
        ls >> p.name;
      }
      elements.back().properties.push_back(p);
    }
  }
  if (!binary_le) fail(ErrorCode::Parse, "PLY format line missing");

  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::vector<double> error;
  const char* p = data.data() + body;
  const char* end = data.data() + data.size();
  auto need = [&](std::size_t n) {
    if (static_cast<std::size_t>(end - p) < n) fail(ErrorCode::Parse, "PLY body truncated");
  };

  for (const PlyElement& e : elements) {
    const bool is_vertex = e.name == "vertex";
    const bool is_face = e.name == "face";
    if (is_vertex) {
      vertices.resize(e.count, Vec3::Zero());
      bool has_error = std::any_of(e.properties.begin(), e.properties.end(),
                                   [](const PlyProperty& q) { return q.name == "error"; });
      if (has_error) error.resize(e.count, 0.0);
    }
    for (std::size_t i = 0; i < e.count; ++i) {
      for (const PlyProperty& prop : e.properties) {
        if (prop.is_list) {
          const std::size_t cs = ply_size(prop.count_type);
          need(cs);
          const double cnt = ply_read(prop.count_type, p);
          p += cs;
          if (cnt < 0) fail(ErrorCode::Parse, "negative PLY list length");
          const auto n = static_cast<std::size_t>(cnt);
          const std::size_t is = ply_size(prop.type);
          need(n * is);
          if (is_face && (prop.name == "vertex_indices" || prop.name == "vertex_index")) {
            if (n != 3)
              fail(ErrorCode::Parse, "face " + std::to_string(i + 1) + " has " + std::to_string(n) +
                                         " vertices; only triangles are supported");
            Face f{};
            for (std::size_t k = 0; k < 3; ++k) {
              const double v = ply_read(prop.type, p + k * is);
              if (v < 0 || v >= static_cast<double>(vertices.size()))
                fail(ErrorCode::Parse, "face " + std::to_string(i + 1) + " references vertex " +
                                           std::to_string(static_cast<long long>(v)) +
                                           " out of range");
              f[k] = static_cast<Index>(v);
            }
            faces.push_back(f);
          }
          p += n * is;
        } else {
          const std::size_t s = ply_size(prop.type);
          need(s);
          if (is_vertex) {
            const double v = ply_read(prop.type, p);
            if (prop.name == "x") vertices[i].x() = v;
            else if (prop.name == "y") vertices[i].y() = v;
            else if (prop.name == "z") vertices[i].z() = v;
            else if (prop.name == "error") error[i] = v;
          }
          p += s;
        }
      }
    }
  }
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& t = faces[f];
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      fail(ErrorCode::Parse, "face " + std::to_string(f + 1) + " repeats a vertex");
  }
  return {TriangleMesh(std::move(vertices), std::move(faces)), std::move(error)};
}

MeshFormat resolve_format(const std::filesystem::path& path, MeshFormat format) {
  if (format != MeshFormat::Auto) return format;
  const std::string ext = lower(path.extension().string());
  if (ext == ".obj") return MeshFormat::Obj;
  if (ext == ".ply") return MeshFormat::Ply;
  fail(ErrorCode::InvalidArgument, "cannot infer mesh format from '" + path.string() + "'");
}

json slots_to_json(const KeypointSlots& s) {
  return json{{"nose_tip", s.nose_tip},
              {"outer_eye_left", s.outer_eye_left},
              {"outer_eye_right", s.outer_eye_right},
              {"nose_bridge", s.nose_bridge},
              {"nose_lower", s.nose_lower}};
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) fail(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

TriangleMesh parse_obj(const std::string& text) {
  std::vector<Vec3> vertices;
  std::vector<std::array<long, 3>> raw_faces;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;
    if (kw == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z()))
        fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": malformed vertex");
      vertices.push_back(p);
    } else if (kw == "f") {
      const std::size_t face_number = raw_faces.size() + 1;
      std::vector<std::string> tokens;
      std::string tok;
      while (ls >> tok) tokens.push_back(tok);
      if (tokens.size() != 3)
        fail(ErrorCode::Parse, "face " + std::to_string(face_number) + " has " +
                                   std::to_string(tokens.size()) +
                                   " vertices; only triangles are supported");
      std::array<long, 3> f{};
      for (int k = 0; k < 3; ++k)
        f[k] = parse_obj_index(tokens[k], static_cast<long>(vertices.size()), face_number);
      raw_faces.push_back(f);
    }
  }
  std::vector<Face> faces;
  faces.reserve(raw_faces.size());
  for (std::size_t i = 0; i < raw_faces.size(); ++i) {
    Face f{};
    for (int k = 0; k < 3; ++k) {
      const long v = raw_faces[i][k];
      if (v < 0 || v >= static_cast<long>(vertices.size()))
        fail(ErrorCode::Parse, "face " + std::to_string(i + 1) + " references vertex " +
                                   std::to_string(v + 1) + " but only " +
                                   std::to_string(vertices.size()) + " vertices exist");
      f[k] = static_cast<Index>(v);
    }
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
      fail(ErrorCode::Parse, "face " + std::to_string(i + 1) + " repeats a vertex");
    faces.push_back(f);
  }
  return TriangleMesh(std::move(vertices), std::move(faces));
}

TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
  const MeshFormat fmt = resolve_format(path, format);
  const std::string data = read_text_file(path);
  try {
    if (fmt == MeshFormat::Obj) return parse_obj(data);
    return parse_ply(data).mesh;
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<double> load_ply_vertex_error(const std::filesystem::path& path) {
  return parse_ply(read_text_file(path)).error;
}

void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ostringstream out;
  out.precision(17);
  for (const Vec3& v : mesh.vertices()) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const Face& f : mesh.faces()) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  write_text_file(path, out.str());
}

void save_ply(const TriangleMesh& mesh, const std::filesystem::path& path, std::span<const double> vertex_error) {
  const bool with_error = !vertex_error.empty();
  if (with_error && vertex_error.size() != mesh.vertex_count())
    fail(ErrorCode::InvalidArgument, "per-vertex error list does not match vertex count");
  std::string out;
  out += "ply\nformat binary_little_endian 1.0\n";
  out += "element vertex " + std::to_string(mesh.vertex_count()) + "\n";
  out += "property float x\nproperty float y\nproperty float z\n";
  if (with_error) out += "property float error\n";
  out += "element face " + std::to_string(mesh.face_count()) + "\n";
  out += "property list uchar int vertex_indices\nend_header\n";
  out.reserve(out.size() + mesh.vertex_count() * 16 + mesh.face_count() * 13);
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    const Vec3& v = mesh.vertex(static_cast<Index>(i));
    put_le(out, static_cast<float>(v.x()));
    put_le(out, static_cast<float>(v.y()));
    put_le(out, static_cast<float>(v.z()));
    if (with_error) put_le(out, static_cast<float>(vertex_error[i]));
  }
  for (const Face& f : mesh.faces()) {
    put_le(out, static_cast<std::uint8_t>(3));
    for (Index v : f) put_le(out, static_cast<std::int32_t>(v));
  }
  write_text_file(path, out);
}

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path) {
  if (resolve_format(path, MeshFormat::Auto) == MeshFormat::Obj) save_obj(mesh, path);
  else save_ply(mesh, path);
}

Annotations annotations_from_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("annotation file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::Parse, "annotation file must be a JSON object");
  Annotations a;
  try {
    if (j.contains("keypoints")) a.keypoints = j.at("keypoints").get<std::vector<Index>>();
    if (j.contains("keypoint_slots")) {
      const json& s = j.at("keypoint_slots");
      KeypointSlots slots;
      slots.nose_tip = s.value("nose_tip", slots.nose_tip);
      slots.outer_eye_left = s.value("outer_eye_left", slots.outer_eye_left);
      slots.outer_eye_right = s.value("outer_eye_right", slots.outer_eye_right);
      slots.nose_bridge = s.value("nose_bridge", slots.nose_bridge);
      slots.nose_lower = s.value("nose_lower", slots.nose_lower);
      a.slots = slots;
    }
    if (j.contains("regions")) {
      for (const auto& [name, faces] : j.at("regions").items())
        a.regions[name] = faces.get<std::vector<Index>>();
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("malformed annotation file: ") + e.what());
  }
  return a;
}

std::string annotations_to_string(const Annotations& a) {
  json j;
  j["keypoints"] = a.keypoints;
  if (a.slots) j["keypoint_slots"] = slots_to_json(*a.slots);
  json regions = json::object();
  for (const auto& [name, faces] : a.regions) regions[name] = faces;
  j["regions"] = regions;
  return j.dump(1) + "\n";
}

Annotations load_annotations(const std::filesystem::path& path) {
  try {
    return annotations_from_string(read_text_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void save_annotations(const Annotations& a, const std::filesystem::path& path) {
  write_text_file(path, annotations_to_string(a));
}

void save_correspondences(const CorrespondenceMap& map, const std::filesystem::path& path) {
  json j;
  j["kind"] = map.kind() == MapKind::VertexToVertex ? "vertex-to-vertex" : "vertex-to-point";
  j["source"] = map.source_id();
  j["target"] = map.target_id();
  json entries = json::array();
  for (const auto& e : map.entries()) {
    if (map.kind() == MapKind::VertexToVertex)
      entries.push_back({e.source_vertex, e.target});
    else
      entries.push_back({e.source_vertex, e.target, e.bary[0], e.bary[1], e.bary[2]});
  }
  j["entries"] = entries;
  write_text_file(path, j.dump() + "\n");
}

CorrespondenceMap load_correspondences(const std::filesystem::path& path) {
  try {
    const json j = json::parse(read_text_file(path));
    const std::string kind = j.at("kind").get<std::string>();
    MapKind k;
    if (kind == "vertex-to-vertex") k = MapKind::VertexToVertex;
    else if (kind == "vertex-to-point") k = MapKind::VertexToPoint;
    else fail(ErrorCode::Parse, "unknown correspondence kind '" + kind + "'");
    CorrespondenceMap map(k, j.value("source", ""), j.value("target", ""));
    for (const json& e : j.at("entries")) {
      if (k == MapKind::VertexToVertex)
        map.add_vertex(e.at(0).get<Index>(), e.at(1).get<Index>());
      else
        map.add_point(e.at(0).get<Index>(), e.at(1).get<Index>(),
                      {e.at(2).get<double>(), e.at(3).get<double>(), e.at(4).get<double>()});
    }
    return map;
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, path.string() + ": malformed correspondence file: " + e.what());
  }
}

}  // namespace regal
