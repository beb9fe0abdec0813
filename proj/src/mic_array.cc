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

#include "shoebox/mic_array.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <Eigen/SVD>

#include "shoebox/errors.h"

namespace shoebox {
namespace {

constexpr double kEm32Radius = 0.042;
constexpr double kDoubleSquareDiameter = 0.375;

Vec3 FromSpherical(double colatitude_deg, double azimuth_deg, double radius) {
  const double th = colatitude_deg * std::numbers::pi / 180.0;
  const double ph = azimuth_deg * std::numbers::pi / 180.0;
  return radius * Vec3(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                       std::cos(th));
}

}  // namespace

const std::vector<std::array<double, 2>>& Em32Angles() {
  static const std::vector<std::array<double, 2>> angles = {
      {69, 0},    {90, 32},   {111, 0},   {90, 328},  {32, 0},    {55, 45},
      {90, 69},   {125, 45},  {148, 0},   {125, 315}, {90, 291},  {55, 315},
      {21, 91},   {58, 90},   {121, 90},  {159, 89},  {69, 180},  {90, 212},
      {111, 180}, {90, 148},  {32, 180},  {55, 225},  {90, 249},  {125, 225},
      {148, 180}, {125, 135}, {90, 111},  {55, 135},  {21, 269},  {58, 270},
      {122, 270}, {159, 271}};
  return angles;
}

MicArray::MicArray(std::string name, std::vector<Vec3> positions)
    : name_(std::move(name)), positions_(std::move(positions)) {
  if (positions_.size() < 4) {
    throw ValidationError("a microphone array needs at least 4 elements");
  }
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : positions_) {
    if (!IsFinite(p)) throw ValidationError("non-finite microphone position");
    centroid += p;
  }
  centroid /= static_cast<double>(positions_.size());
  // Already-centered inputs are kept bit-for-bit.
  if (centroid.norm() <= 1e-12) centroid.setZero();
  Eigen::MatrixXd centered(positions_.size(), 3);
  for (size_t m = 0; m < positions_.size(); ++m) {
    positions_[m] -= centroid;
    centered.row(m) = positions_[m].transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
  if (svd.singularValues()(2) <= 1e-9) {
    throw ValidationError("microphone positions are coplanar");
  }
}

MicArray MicArray::Em32(double scale) {
  std::vector<Vec3> positions;
  for (const auto& [colat, az] : Em32Angles()) {
    positions.push_back(FromSpherical(colat, az, kEm32Radius * scale));
  }
  return MicArray("em32", std::move(positions));
}

MicArray MicArray::DoubleSquare(double scale) {
  const double r = 0.5 * kDoubleSquareDiameter * scale;
  const double side = r * std::sqrt(2.0);
  const double half_gap = 0.25 * side;
  std::vector<Vec3> positions;
  for (int layer = 0; layer < 2; ++layer) {
    const double offset = layer == 0 ? 0.0 : std::numbers::pi / 4.0;
    const double z = layer == 0 ? -half_gap : half_gap;
    for (int k = 0; k < 4; ++k) {
      const double ang = offset + k * std::numbers::pi / 2.0;
      positions.emplace_back(r * std::cos(ang), r * std::sin(ang), z);
    }
  }
  return MicArray("double_square", std::move(positions));
}

MicArray MicArray::FromCsv(const std::string& path, double scale) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open array file " + path);
  std::string line;
  bool spherical = false;
  std::vector<Vec3> positions;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.find_first_of("abcdefghijklmnopqrstuvwxyz") != std::string::npos) {
      spherical = line.find("colatitude") != std::string::npos;
      continue;
    }
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a = 0, b = 0, c = 0;
    if (!(row >> a >> b >> c)) throw IoError("malformed row in " + path);
    positions.push_back(spherical ? FromSpherical(a, b, c * scale)
                                  : Vec3(a, b, c) * scale);
  }
  std::string name = path.substr(path.find_last_of('/') + 1);
  name = name.substr(0, name.find('.'));
  return MicArray(name, std::move(positions));
}

MicArray MicArray::ByName(const std::string& name, double scale) {
  if (name == "em32") return Em32(scale);
  if (name == "double_square") return DoubleSquare(scale);
  return FromCsv(name, scale);
}

double MicArray::radius() const {
  double r = 0.0;
  for (const Vec3& p : positions_) r = std::max(r, p.norm());
  return r;
}

}  // namespace shoebox
