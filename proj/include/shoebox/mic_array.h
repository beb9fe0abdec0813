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

#ifndef SHOEBOX_MIC_ARRAY_H_
#define SHOEBOX_MIC_ARRAY_H_

#include <string>
#include <vector>

#include "shoebox/geometry.h"

namespace shoebox {

// Microphone positions in the array frame. The constructor recenters the
// positions so their centroid is the origin.
class MicArray {
 public:
  MicArray(std::string name, std::vector<Vec3> positions);

  // 32 capsules on a sphere of radius 4.2 cm * scale (em32 layout).
  static MicArray Em32(double scale = 1.0);
  // Two horizontal squares stacked vertically, the top one rotated by pi/4.
  // Overall diameter 37.5 cm * scale; vertical gap is half the square side.
  static MicArray DoubleSquare(double scale = 1.0);
  // Reads "x,y,z" rows in meters, or "colatitude_deg,azimuth_deg,radius_m"
  // rows when the header says so.
  static MicArray FromCsv(const std::string& path, double scale = 1.0);
  // Dispatches on "em32" / "double_square" / a CSV path.
  static MicArray ByName(const std::string& name, double scale = 1.0);

  const std::string& name() const { return name_; }
  const std::vector<Vec3>& positions() const { return positions_; }
  int size() const { return static_cast<int>(positions_.size()); }
  const Vec3& operator[](int m) const { return positions_[m]; }
  // Largest distance of a microphone from the array center.
  double radius() const;

 private:
  std::string name_;
  std::vector<Vec3> positions_;
};

// Em32 capsule directions as (colatitude, azimuth) in degrees.
const std::vector<std::array<double, 2>>& Em32Angles();

}  // namespace shoebox

#endif  // SHOEBOX_MIC_ARRAY_H_
