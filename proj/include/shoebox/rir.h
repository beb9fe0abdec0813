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

#ifndef SHOEBOX_RIR_H_
#define SHOEBOX_RIR_H_

#include <cstdint>
#include <limits>
#include <string>

#include <Eigen/Core>

#include "shoebox/image_sources.h"
#include "shoebox/mic_array.h"
#include "shoebox/scene.h"

namespace shoebox {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// M x N discrete RIR, one row per microphone (channel-major storage).
struct MultichannelRir {
  RowMatrix samples;
  double fs = 16000.0;
  double duration = 0.05;
  std::string array_name;

  int channels() const { return static_cast<int>(samples.rows()); }
  int length() const { return static_cast<int>(samples.cols()); }
  bool IsZero() const { return samples.cwiseAbs().maxCoeff() == 0.0; }
};

// N = round(duration * fs).
int NumSamples(double fs, double duration);

// Image order used by SimulateSceneRir.
inline constexpr int kSimulationOrder = 20;
// Extra enumeration radius beyond c * duration, in samples.
inline constexpr double kGuardSamples = 10.0;

// x[m][n] = sum_k a_k sinc(pi (n - fs |r_m - r_k| / c)) / (4 pi |r_m - r_k|),
// evaluated exactly. Throws SingularityError when a source is within 1 um of
// a microphone.
MultichannelRir SynthesizeRir(const ImageSourceCloud& cloud,
                              const MicArray& array, double fs,
                              double duration);

// Enumeration radius used by SimulateSceneRir.
double SimulationRadius(const MicArray& array, double fs, double duration);

// Enumerates images up to order 20 within SimulationRadius and synthesizes.
MultichannelRir SimulateSceneRir(const Scene& scene, double fs, double duration);

struct NoiseSpec {
  double psnr_db = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
};

// Adds i.i.d. N(0, s^2) with s = max|x| 10^(-psnr/20). Infinite PSNR is the
// identity. Throws ValidationError on an all-zero RIR.
MultichannelRir AddNoisePsnr(const MultichannelRir& rir, const NoiseSpec& spec);

struct RecoveredRoom;

// Re-simulates the recovered room with the source and array moved to
// `placement` (given in the original array frame).
MultichannelRir ExtrapolateRir(const RecoveredRoom& recovered,
                               const Placement& placement,
                               const MicArray& array, double fs,
                               double duration);

// Raw little-endian float64 samples (channel-major) plus a JSON sidecar
// {fs, duration, M, N, scene_id}. `base` is the path without extension.
void WriteRir(const MultichannelRir& rir, const std::string& base,
              const std::string& scene_id);
MultichannelRir ReadRir(const std::string& base);
// One column per channel.
void WriteRirCsv(const MultichannelRir& rir, const std::string& path);

}  // namespace shoebox

#endif  // SHOEBOX_RIR_H_
