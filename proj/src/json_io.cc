/*
Copyright 2026 The Shoebox Inversion Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS-IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include "shoebox/json_io.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "shoebox/errors.h"

namespace shoebox {
namespace {

void Dump(const Json& j, int indent, int depth, std::string& out) {
  const std::string pad(indent * (depth + 1), ' ');
  const std::string pad_close(indent * depth, ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad;
        out += Json(it.key()).dump();
        out += indent > 0 ? ": " : ":";
        Dump(it.value(), indent, depth + 1, out);
      }
      out += nl;
      out += pad_close;
      out += "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool scalars = true;
      for (const auto& v : j) scalars = scalars && !v.is_structured();
      out += "[";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += scalars ? ", " : ",";
        first = false;
        if (!scalars) {
          out += nl;
          out += pad;
        }
        Dump(v, indent, depth + 1, out);
      }
      if (!scalars) {
        out += nl;
        out += pad_close;
      }
      out += "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      std::string s(buf);
      if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
      out += s;
      return;
    }
    default:
      out += j.dump();
  }
}

std::array<double, 6> Array6(const Json& j) {
  std::array<double, 6> a;
  if (!j.is_array() || j.size() != 6) {
    throw ValidationError("expected an array of 6 numbers");
  }
  for (int i = 0; i < 6; ++i) a[i] = j[i].get<double>();
  return a;
}

Json ArrayJson(const MicArray& array) {
  Json positions = Json::array();
  for (const Vec3& p : array.positions()) positions.push_back(ToJson(p));
  Json j;
  j["name"] = array.name();
  j["positions_m"] = positions;
  return j;
}

MicArray ArrayFromJson(const Json& j) {
  std::vector<Vec3> positions;
  for (const auto& p : j.at("positions_m")) positions.push_back(Vec3FromJson(p));
  return MicArray(j.at("name").get<std::string>(), std::move(positions));
}

}  // namespace

std::string DumpJson(const Json& j, int indent) {
  std::string out;
  Dump(j, indent, 0, out);
  out += "\n";
  return out;
}

Json ToJson(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 Vec3FromJson(const Json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw ValidationError("expected an array of 3 numbers");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Json SceneToJson(const Scene& scene) {
  Json j;
  j["dims_m"] = ToJson(scene.room.dims);
  Json rot = Json::array();
  const Mat3& r = scene.room.pose.matrix();
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) rot.push_back(r(row, col));
  }
  j["rotation"] = rot;
  j["corner_origin_m"] = ToJson(scene.room.corner_origin);
  j["absorptions"] = scene.walls.absorptions();
  j["source_m"] = ToJson(scene.source);
  j["array"] = ArrayJson(scene.array);
  j["source_room_m"] = ToJson(scene.source_room);
  return j;
}

Scene SceneFromJson(const Json& j) {
  RoomBox room;
  room.dims = Vec3FromJson(j.at("dims_m"));
  const Json& rot = j.at("rotation");
  if (!rot.is_array() || rot.size() != 9) {
    throw ValidationError("rotation must have 9 entries");
  }
  Mat3 r;
  for (int k = 0; k < 9; ++k) r(k / 3, k % 3) = rot[k].get<double>();
  room.pose = Rotation::FromMatrix(r);
  room.corner_origin = Vec3FromJson(j.at("corner_origin_m"));
  const Vec3 source = Vec3FromJson(j.at("source_m"));
  const Vec3 source_room = j.contains("source_room_m")
                               ? Vec3FromJson(j["source_room_m"])
                               : room.ToRoomFrame(source);
  Scene scene{room, WallSet(Array6(j.at("absorptions"))), source, source_room,
              ArrayFromJson(j.at("array"))};
  scene.Validate(Scene::Checks::kPhysical);
  return scene;
}

Json CloudToJson(const ImageSourceCloud& cloud) {
  Json j = Json::array();
  for (const ImageSource& s : cloud.sources) {
    Json e;
    e["position_m"] = ToJson(s.position);
    e["amplitude"] = s.amplitude;
    if (s.order) e["order"] = *s.order;
    if (s.lattice) {
      e["q"] = s.lattice->q;
      e["eps"] = s.lattice->eps;
    }
    j.push_back(e);
  }
  return j;
}

ImageSourceCloud CloudFromJson(const Json& j) {
  ImageSourceCloud cloud;
  for (const auto& e : j) {
    ImageSource s;
    s.position = Vec3FromJson(e.at("position_m"));
    s.amplitude = e.at("amplitude").get<double>();
    if (e.contains("order")) s.order = e["order"].get<int>();
    if (e.contains("q") && e.contains("eps")) {
      s.lattice = LatticeIndex{e["q"].get<std::array<int, 3>>(),
                               e["eps"].get<std::array<int, 3>>()};
    }
    cloud.sources.push_back(s);
  }
  return cloud;
}

Json RecoveredToJson(const RecoveredRoom& rec, const MicArray& array) {
  Json j;
  j["dims_m"] = ToJson(rec.dims);
  Json rot = Json::array();
  const Mat3 r = rec.basis.AsMatrix();
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) rot.push_back(r(row, col));
  }
  j["rotation"] = rot;
  j["corner_origin_m"] = ToJson(rec.source - r * rec.translation);
  j["absorptions"] = rec.absorptions;
  j["source_m"] = ToJson(rec.source);
  j["array"] = ArrayJson(array);
  j["translation_m"] = ToJson(rec.translation);
  Json first = Json::array();
  for (const ImageSource& s : rec.first_order) {
    first.push_back({{"position_m", ToJson(s.position)},
                     {"amplitude", s.amplitude}});
  }
  j["first_order"] = first;
  j["raw_amplitudes"] = rec.raw_amplitudes;
  j["raw_absorptions"] = rec.raw_absorptions;
  j["source_amplitude"] = rec.source_amplitude;
  return j;
}

RecoveredRoom RecoveredFromJson(const Json& j) {
  RecoveredRoom rec;
  rec.dims = Vec3FromJson(j.at("dims_m"));
  const Json& rot = j.at("rotation");
  Mat3 r;
  for (int k = 0; k < 9; ++k) r(k / 3, k % 3) = rot.at(k).get<double>();
  rec.basis = Basis{r.col(0), r.col(1), r.col(2)};
  rec.source = Vec3FromJson(j.at("source_m"));
  rec.translation = Vec3FromJson(j.at("translation_m"));
  rec.absorptions = Array6(j.at("absorptions"));
  rec.raw_absorptions = Array6(j.at("raw_absorptions"));
  rec.raw_amplitudes = Array6(j.at("raw_amplitudes"));
  rec.source_amplitude = j.at("source_amplitude").get<double>();
  const Json& first = j.at("first_order");
  for (int w = 0; w < 6 && w < static_cast<int>(first.size()); ++w) {
    rec.first_order[w].position = Vec3FromJson(first[w].at("position_m"));
    rec.first_order[w].amplitude = first[w].at("amplitude").get<double>();
  }
  return rec;
}

void WriteTextFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << contents;
  if (!out) throw IoError("write failed for " + path);
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json ReadJsonFile(const std::string& path) {
  try {
    return Json::parse(ReadTextFile(path));
  } catch (const Json::parse_error& e) {
    throw IoError(path + ": " + e.what());
  }
}

}  // namespace shoebox
