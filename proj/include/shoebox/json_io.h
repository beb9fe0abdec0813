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

#ifndef SHOEBOX_JSON_IO_H_
#define SHOEBOX_JSON_IO_H_

#include <string>

#include "json.hpp"
#include "shoebox/image_sources.h"
#include "shoebox/recovered_room.h"
#include "shoebox/scene.h"

namespace shoebox {

using Json = nlohmann::ordered_json;

// Serializes with insertion-ordered keys and every float printed with 17
// significant digits, so documents round-trip bit-exactly.
std::string DumpJson(const Json& j, int indent = 2);

Json ToJson(const Vec3& v);
Vec3 Vec3FromJson(const Json& j);

// {dims_m, rotation (row-major), corner_origin_m, absorptions, source_m,
//  array: {name, positions_m}}
Json SceneToJson(const Scene& scene);
Scene SceneFromJson(const Json& j);

// [{position_m, amplitude}, ...]
Json CloudToJson(const ImageSourceCloud& cloud);
ImageSourceCloud CloudFromJson(const Json& j);

// Scene-like fields of the recovered room plus first_order, raw_amplitudes
// and raw_absorptions.
Json RecoveredToJson(const RecoveredRoom& recovered, const MicArray& array);
RecoveredRoom RecoveredFromJson(const Json& j);

void WriteTextFile(const std::string& path, const std::string& contents);
std::string ReadTextFile(const std::string& path);
Json ReadJsonFile(const std::string& path);

}  // namespace shoebox

#endif  // SHOEBOX_JSON_IO_H_
