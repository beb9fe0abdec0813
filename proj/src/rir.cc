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

#include "shoebox/rir.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "shoebox/errors.h"
#include "shoebox/forward_model.h"
#include "shoebox/json_io.h"
#include "shoebox/parallel.h"
#include "shoebox/recovered_room.h"

namespace shoebox {

int NumSamples(double fs, double duration) {
  if (!(fs > 0.0) || !(duration > 0.0)) {
    throw ValidationError("fs and duration must be positive");
  }
  return static_cast<int>(std::lround(fs * duration));
}

MultichannelRir SynthesizeRir(const ImageSourceCloud& cloud,
                              const MicArray& array, double fs,
                              double duration) {
  if (cloud.empty()) throw ValidationError("cannot synthesize an empty cloud");
  const int n = NumSamples(fs, duration);
  const ForwardModel model(array, fs, n);
  MultichannelRir rir;
  rir.samples = RowMatrix::Zero(array.size(), n);
  rir.fs = fs;
  rir.duration = duration;
  rir.array_name = array.name();
  // Channels are independent and each one sums sources in cloud order, so the
  // result does not depend on the worker count.
  ParallelFor(array.size(), [&](int m) {
    std::span<double> row(rir.samples.row(m).data(), n);
    for (const ImageSource& s : cloud.sources) {
      model.AccumulateChannel(m, s.position, s.amplitude, row);
    }
  });
  return rir;
}

double SimulationRadius(const MicArray& array, double fs, double duration) {
  return kSpeedOfSound * duration + kGuardSamples * kSpeedOfSound / fs +
         array.radius();
}

MultichannelRir SimulateSceneRir(const Scene& scene, double fs,
                                 double duration) {
  const ImageSourceCloud cloud = EnumerateImageSources(
      scene, kSimulationOrder, SimulationRadius(scene.array, fs, duration));
  return SynthesizeRir(cloud, scene.array, fs, duration);
}

MultichannelRir AddNoisePsnr(const MultichannelRir& rir, const NoiseSpec& spec) {
  if (std::isnan(spec.psnr_db)) throw ValidationError("PSNR must not be NaN");
  const double peak = rir.samples.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) throw ValidationError("PSNR is undefined for a zero RIR");
  if (std::isinf(spec.psnr_db) && spec.psnr_db > 0) return rir;
  const double sigma = peak * std::pow(10.0, -spec.psnr_db / 20.0);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, sigma);
  MultichannelRir out = rir;
  for (int m = 0; m < out.channels(); ++m) {
    for (int i = 0; i < out.length(); ++i) out.samples(m, i) += noise(rng);
  }
  return out;
}

MultichannelRir ExtrapolateRir(const RecoveredRoom& recovered,
                               const Placement& placement,
                               const MicArray& array, double fs,
                               double duration) {
  const Scene estimated = SceneFromRecovered(recovered, array);
  const Scene moved =
      PlaceInScene(estimated, placement, Scene::Checks::kPhysical);
  return SimulateSceneRir(moved, fs, duration);
}

void WriteRir(const MultichannelRir& rir, const std::string& base,
              const std::string& scene_id) {
  static_assert(std::endian::native == std::endian::little,
                "RIR files are little-endian");
  std::ofstream out(base + ".f64", std::ios::binary);
  if (!out) throw IoError("cannot write " + base + ".f64");
  out.write(reinterpret_cast<const char*>(rir.samples.data()),
            static_cast<std::streamsize>(rir.samples.size() * sizeof(double)));
  if (!out) throw IoError("write failed for " + base + ".f64");
  Json side;
  side["fs"] = rir.fs;
  side["duration"] = rir.duration;
  side["M"] = rir.channels();
  side["N"] = rir.length();
  side["scene_id"] = scene_id;
  side["array"] = rir.array_name;
  WriteTextFile(base + ".json", DumpJson(side));
}

MultichannelRir ReadRir(const std::string& base) {
  const Json side = ReadJsonFile(base + ".json");
  MultichannelRir rir;
  rir.fs = side.at("fs").get<double>();
  rir.duration = side.at("duration").get<double>();
  rir.array_name = side.value("array", std::string());
  const int m = side.at("M").get<int>();
  const int n = side.at("N").get<int>();
  rir.samples = RowMatrix::Zero(m, n);
  std::ifstream in(base + ".f64", std::ios::binary);
  if (!in) throw IoError("cannot read " + base + ".f64");
  in.read(reinterpret_cast<char*>(rir.samples.data()),
          static_cast<std::streamsize>(rir.samples.size() * sizeof(double)));
  if (in.gcount() !=
      static_cast<std::streamsize>(rir.samples.size() * sizeof(double))) {
    throw IoError(base + ".f64 is shorter than its sidecar says");
  }
  return rir;
}

void WriteRirCsv(const MultichannelRir& rir, const std::string& path) {
  std::string out;
  for (int m = 0; m < rir.channels(); ++m) {
    out += (m ? ",ch" : "ch") + std::to_string(m);
  }
  out += "\n";
  char buf[40];
  for (int n = 0; n < rir.length(); ++n) {
    for (int m = 0; m < rir.channels(); ++m) {
      std::snprintf(buf, sizeof(buf), m ? ",%.17g" : "%.17g", rir.samples(m, n));
      out += buf;
    }
    out += "\n";
  }
  WriteTextFile(path, out);
}

}  // namespace shoebox
