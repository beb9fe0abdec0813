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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. `acceptance --only 1,2,8` runs a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shoebox/forward_model.h"
#include "shoebox/image_sources.h"
#include "shoebox/json_io.h"
#include "shoebox/metrics.h"
#include "shoebox/orientation.h"
#include "shoebox/parallel.h"
#include "shoebox/recovered_room.h"
#include "shoebox/recovery.h"
#include "shoebox/rir.h"
#include "shoebox/scene.h"
#include "shoebox/sfw.h"
#include "shoebox/study.h"
#include "test_util.h"

namespace shoebox {
namespace {

constexpr double kPi = std::numbers::pi;

// Criterion 1.
constexpr int kPropMesh = 10000;
constexpr int kPropDraws = 5;
constexpr double kPropAngleDeg = 2.0;
constexpr double kPropRuntimeS = 60.0;
// Criterion 2.
constexpr int kRoundTripScenes = 50;
constexpr double kRoundTripAxisDeg = 1e-3;
constexpr double kRoundTripLengthM = 1e-4;
constexpr double kRoundTripAbsorption = 1e-6;
constexpr double kRoundTripRuntimeS = 120.0;
// Criterion 3.
constexpr double kLinearityRel = 1e-12;
// Criterion 4.
constexpr int kSingleSourceFixtures = 20;
constexpr double kSuperResFraction = 0.9;
constexpr double kSuperResM = 2e-3;
// Criterion 5.
constexpr int kDeskRooms = 10;
constexpr double kDeskMedianDimM = 0.02;
constexpr double kDeskMedianAxisDeg = 0.5;
constexpr double kDeskAbsorptionRecall = 0.9;
constexpr double kDeskAbsorptionMae = 0.05;
// Criterion 6.
constexpr double kExtrapolationMeanSerDb = 10.0;
// Criterion 7.
constexpr int kNoisyRooms = 10;
constexpr double kNoisyPsnrDb = 25.0;
constexpr double kNoisyFs = 24000.0;
constexpr double kNoisyThresholdM = 0.05;
constexpr double kNoisyRecall = 0.8;
// Criterion 8.
constexpr double kGradientRel = 1e-5;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Format(const char* fmt, double a = 0, double b = 0, double c = 0,
                   double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c, d);
  return buf;
}

Vec3 Draw(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

Outcome GridOracle() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  int runs = 0, good = 0;
  double worst = 0.0;
  for (int n1 : {2, 4}) {
    for (int n2 : {2, 4}) {
      for (int n3 : {2, 4}) {
        for (int draw = 0; draw < kPropDraws; ++draw) {
          const Vec3 dims = Draw(rng, 2.0, 10.0);
          const Vec3 d = dims.cwiseProduct(Draw(rng, 0.02, 0.98));
          const ImageSourceCloud c = testing::CompleteGrid({n1, n2, n3}, dims, d);
          const Vec3 u = BruteForceArgmaxJ3(c, kPropMesh);
          double angle = 180.0;
          for (const Vec3& e : testing::Axes()) {
            angle = std::min(angle, testing::AxisAngleDeg(u, e));
          }
          const OrthogonalityScore score(c);
          const bool count_ok =
              score.CountJ3(Vec3::UnitX()) == 1LL * n1 * n2 * n2 * n3 * n3;
          worst = std::max(worst, angle);
          ++runs;
          if (angle < kPropAngleDeg && count_ok) ++good;
        }
      }
    }
  }
  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  return {good == runs && secs < kPropRuntimeS,
          Format("%.0f/%.0f grids ok, worst angle %.2e deg, %.1f s", good, runs,
                 worst, secs)};
}

// Room-frame value of the recovered translation along a matched axis.
double MatchedTranslationError(const AxisMatch& m, const RecoveredRoom& r,
                               const Scene& s) {
  double worst = 0.0;
  for (int t = 0; t < 3; ++t) {
    const int k = m.permutation[t];
    const double gt = m.signs[t] > 0 ? s.source_room[k]
                                     : s.room.dims[k] - s.source_room[k];
    worst = std::max(worst, std::abs(r.translation[t] - gt));
  }
  return worst;
}

Outcome OracleRoundTrip() {
  const auto start = std::chrono::steady_clock::now();
  double axis = 0, length = 0, absorption = 0, translation = 0;
  int failures = 0;
  for (int i = 0; i < kRoundTripScenes; ++i) {
    const Scene s = RandomScene(SceneDistribution{}, MixSeed(202, i));
    try {
      const ImageSourceCloud c = EnumerateImageSources(s, 2, 1e9);
      const RecoveredRoom r = RecoverRoom(c, EstimateOrientation(c));
      const AxisMatch m = MatchAxes(r.basis, s.room.pose);
      const RoomRecord rec = EvaluateRoom(r, s);
      for (double e : rec.axis_errors_deg) axis = std::max(axis, e);
      for (double e : rec.dim_errors_m) length = std::max(length, e);
      for (double e : rec.absorption_errors) absorption = std::max(absorption, e);
      translation = std::max(translation, MatchedTranslationError(m, r, s));
    } catch (const std::exception& e) {
      std::fprintf(stderr, "  scene %d: %s\n", i, e.what());
      ++failures;
    }
  }
  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  const bool pass = failures == 0 && axis < kRoundTripAxisDeg &&
                    length < kRoundTripLengthM &&
                    absorption < kRoundTripAbsorption &&
                    translation < kRoundTripLengthM && secs < kRoundTripRuntimeS;
  return {pass,
          Format("max axis %.1e deg, max |dL| %.1e m, max |da| %.1e, ", axis,
                 length, absorption) +
              Format("max |dtau| %.1e m, %.0f failures, %.1f s", translation,
                     failures, secs)};
}

ImageSourceCloud Single(const Vec3& p, double a = 1.0) {
  ImageSourceCloud c;
  ImageSource s;
  s.position = p;
  s.amplitude = a;
  c.sources.push_back(s);
  return c;
}

Outcome ForwardModelRegression() {
  // On-grid delay: 3.43 m at 16 kHz is exactly 160 samples.
  const MicArray tetra("tetra", {Vec3(0.05, 0.05, 0.05), Vec3(-0.05, -0.05, 0.05),
                                 Vec3(-0.05, 0.05, -0.05), Vec3(0.05, -0.05, -0.05)});
  const MultichannelRir x =
      SynthesizeRir(Single(tetra[0] + Vec3(3.43, 0, 0)), tetra, 16000, 0.05);
  Eigen::Index arg;
  const double peak = x.samples.row(0).maxCoeff(&arg);
  const bool peak_ok =
      arg == 160 && std::abs(peak - 1.0 / (4 * kPi * 3.43)) < 1e-15;
  // Linearity.
  std::mt19937_64 rng(303);
  ImageSourceCloud a, b, mix;
  for (int k = 0; k < 40; ++k) {
    ImageSource s;
    s.position = (1.0 + 14.0 * std::uniform_real_distribution<double>()(rng)) *
                 testing::RandomUnit(rng);
    s.amplitude = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    (k % 2 ? a : b).sources.push_back(s);
  }
  const double alpha = 0.3, beta = -1.7;
  for (ImageSource s : a.sources) {
    s.amplitude *= alpha;
    mix.sources.push_back(s);
  }
  for (ImageSource s : b.sources) {
    s.amplitude *= beta;
    mix.sources.push_back(s);
  }
  const MicArray em32 = MicArray::Em32();
  const RowMatrix lhs = SynthesizeRir(mix, em32, 16000, 0.05).samples;
  const RowMatrix rhs = alpha * SynthesizeRir(a, em32, 16000, 0.05).samples +
                        beta * SynthesizeRir(b, em32, 16000, 0.05).samples;
  const double rel = (lhs - rhs).norm() / rhs.norm();
  const bool n_ok = NumSamples(16000, 0.05) == 800 && lhs.cols() == 800;
  return {peak_ok && rel < kLinearityRel && n_ok,
          Format("peak at n=%.0f value %.6f, linearity rel %.1e, N=%.0f",
                 static_cast<double>(arg), peak, rel, lhs.cols())};
}

Outcome SuperResolution() {
  const MicArray array = MicArray::Em32();
  const double fs = 16000, duration = 0.05;
  const double discrete = kSpeedOfSound / (2 * fs);
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> radius(1.0, 15.0);
  int within_discrete = 0, within_fine = 0;
  std::vector<double> errors;
  for (int i = 0; i < kSingleSourceFixtures; ++i) {
    const Vec3 r0 = radius(rng) * testing::RandomUnit(rng);
    const SfwResult res =
        SfwLocalize(SynthesizeRir(Single(r0), array, fs, duration), array);
    double err = std::numeric_limits<double>::infinity();
    double best_amp = -1.0;
    for (const ImageSource& s : res.cloud.sources) {
      if (s.amplitude > best_amp) {
        best_amp = s.amplitude;
        err = (s.position - r0).norm();
      }
    }
    errors.push_back(err);
    if (err < discrete) ++within_discrete;
    if (err < kSuperResM) ++within_fine;
    std::fprintf(stderr, "  fixture %2d: |r|=%.2f m, error %.2e mm, %d spikes\n",
                 i, r0.norm(), 1e3 * err, res.cloud.size());
  }
  const Summary s = Summarize(errors);
  return {within_discrete == kSingleSourceFixtures &&
              within_fine >= kSuperResFraction * kSingleSourceFixtures,
          Format("%.0f/20 < c/(2fs), %.0f/20 < 2 mm, mean %.2e mm, median %.2e mm",
                 within_discrete, within_fine, 1e3 * s.mean, 1e3 * s.median)};
}

struct RoomRun {
  RoomRecord record;
  bool all_walls = false;
};

std::vector<RoomRun> RunRooms(const StudyConfig& cfg, const char* tag) {
  std::vector<RoomRun> runs(cfg.n_rooms);
  for (int i = 0; i < cfg.n_rooms; ++i) {
    const auto start = std::chrono::steady_clock::now();
    const RoomSimulation sim = SimulateRoom(cfg, i);
    const InversionResult inv = InvertRoom(cfg, sim.scene, sim.input());
    const ExtrapolationResult ext = ExtrapolateRoom(
        cfg, i, sim.scene, inv.recovered ? &*inv.recovered : nullptr);
    runs[i].record = MakeRoomRecord(cfg, i, sim.scene, inv, &ext);
    runs[i].all_walls = inv.recovered.has_value() && runs[i].record.ok;
    const RoomRecord& r = runs[i].record;
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    if (r.ok) {
      std::fprintf(stderr,
                   "  [%s] %s: %d spikes, dims err %.1f/%.1f/%.1f mm, "
                   "axis err %.3f/%.3f/%.3f deg, SER %.1f dB, %.0f s\n",
                   tag, r.room_id.c_str(), r.num_spikes, 1e3 * r.dim_errors_m[0],
                   1e3 * r.dim_errors_m[1], 1e3 * r.dim_errors_m[2],
                   r.axis_errors_deg[0], r.axis_errors_deg[1],
                   r.axis_errors_deg[2], r.ser_db.value_or(NAN), secs);
    } else {
      std::fprintf(stderr, "  [%s] %s: failed (%s), %.0f s\n", tag,
                   r.room_id.c_str(), r.failure.c_str(), secs);
    }
  }
  return runs;
}

const std::vector<RoomRun>& DeskRooms() {
  static const std::vector<RoomRun> runs = [] {
    StudyConfig cfg;
    cfg.n_rooms = kDeskRooms;
    return RunRooms(cfg, "16k");
  }();
  return runs;
}

Outcome DeskScale() {
  std::vector<RoomRecord> records;
  for (const RoomRun& r : DeskRooms()) records.push_back(r.record);
  const EvalReport rep = Aggregate(records, DefaultRecallThresholds());
  // Failed rooms enter the medians as infinite errors.
  std::vector<double> dims, axes;
  for (const RoomRecord& r : records) {
    for (int t = 0; t < 3; ++t) {
      dims.push_back(r.ok ? r.dim_errors_m[t] : INFINITY);
      axes.push_back(r.ok ? r.axis_errors_deg[t] : INFINITY);
    }
  }
  const double med_dim = Summarize(dims).median;
  const double med_axis = Summarize(axes).median;
  const bool pass = med_dim < kDeskMedianDimM && med_axis < kDeskMedianAxisDeg &&
                    rep.absorption_recall >= kDeskAbsorptionRecall &&
                    rep.absorption_error.mean < kDeskAbsorptionMae;
  return {pass,
          Format("median dim err %.2f mm, median axis err %.4f deg, ",
                 1e3 * med_dim, med_axis) +
              Format("absorption recall %.3f, MAE %.4f, %.0f failed rooms",
                     rep.absorption_recall, rep.absorption_error.mean,
                     rep.num_failed)};
}

Outcome Extrapolation() {
  std::vector<double> ser;
  bool oracle_capped = true;
  for (const RoomRun& r : DeskRooms()) {
    if (!r.record.oracle_ser_db || *r.record.oracle_ser_db < kDefaultSerCapDb) {
      oracle_capped = false;
    }
    if (r.all_walls && r.record.ser_db) ser.push_back(*r.record.ser_db);
  }
  const Summary s = Summarize(ser);
  return {!ser.empty() && s.mean > kExtrapolationMeanSerDb && oracle_capped,
          Format("mean SER %.2f dB over %.0f rooms (median %.2f), oracle capped: %.0f",
                 s.mean, s.count, s.median, oracle_capped ? 1.0 : 0.0)};
}

Outcome NoiseRobustness() {
  StudyConfig cfg;
  cfg.n_rooms = kNoisyRooms;
  cfg.fs = kNoisyFs;
  cfg.psnr_db = kNoisyPsnrDb;
  std::vector<double> dims;
  int failed = 0;
  for (const RoomRun& r : RunRooms(cfg, "24k/25dB")) {
    if (!r.record.ok) ++failed;
    for (int t = 0; t < 3; ++t) {
      dims.push_back(r.record.ok ? r.record.dim_errors_m[t] : INFINITY);
    }
  }
  const double recall = RecallCurve(dims, {kNoisyThresholdM})[0];
  return {recall >= kNoisyRecall,
          Format("%.3f of dimensions within 5 cm, median %.2f mm, %.0f failed rooms",
                 recall, 1e3 * Summarize(dims).median, failed)};
}

Outcome PropertySuites() {
  std::vector<std::string> broken;
  std::mt19937_64 rng(808);
  const Scene ref = testing::ReferenceScene();
  const ImageSourceCloud gt = EnumerateImageSources(ref, 2, 1e3);

  // Gradient of the relaxed orthogonality score in angle coordinates.
  const OrthogonalityScore score(gt);
  for (int i = 0; i < 20; ++i) {
    const double th = 2 * kPi * std::uniform_real_distribution<double>()(rng);
    const double ph = 0.2 + (kPi - 0.4) * std::uniform_real_distribution<double>()(rng);
    double gt_th, gt_ph;
    score.J3Angles(th, ph, 0.01, &gt_th, &gt_ph);
    const double h = 1e-7;
    const double ft = (score.J3Angles(th + h, ph, 0.01) - score.J3Angles(th - h, ph, 0.01)) / (2 * h);
    const double fp = (score.J3Angles(th, ph + h, 0.01) - score.J3Angles(th, ph - h, 0.01)) / (2 * h);
    const double scale = std::max({std::abs(gt_th), std::abs(gt_ph), 1e-3});
    if (std::abs(ft - gt_th) > kGradientRel * scale ||
        std::abs(fp - gt_ph) > kGradientRel * scale) {
      broken.push_back("J3 gradient");
      break;
    }
  }

  // Gradient of the SFW data-fit term in positions.
  const MicArray em32 = MicArray::Em32();
  const ForwardModel model(em32, 16000, 800);
  std::vector<double> data = model.Signature(Vec3(1.5, 0.5, 0.2));
  model.Accumulate(Vec3(-2.0, 1.0, 0.8), 0.7, data);
  for (int i = 0; i < 20; ++i) {
    const std::vector<Vec3> p = {Vec3(1.5, 0.5, 0.2) + 0.01 * testing::RandomUnit(rng),
                                 Vec3(-2.0, 1.0, 0.8) + 0.01 * testing::RandomUnit(rng)};
    const std::vector<double> a = {0.9, 0.6};
    std::vector<Vec3> g;
    SfwObjective(model, data, p, a, 0.0, &g);
    bool ok = true;
    for (int k = 0; k < 2 && ok; ++k) {
      for (int t = 0; t < 3; ++t) {
        std::vector<Vec3> pp = p, pm = p;
        pp[k][t] += 1e-6;
        pm[k][t] -= 1e-6;
        const double fd = (SfwObjective(model, data, pp, a, 0.0) -
                           SfwObjective(model, data, pm, a, 0.0)) / 2e-6;
        if (std::abs(fd - g[k][t]) > kGradientRel * std::max(std::abs(fd), g[k].norm())) {
          ok = false;
        }
      }
    }
    if (!ok) {
      broken.push_back("SFW data-fit gradient");
      break;
    }
  }

  // Sign and rotation equivariance of the score and of recovery.
  const Rotation q = RandomRotation(rng);
  ImageSourceCloud rotated = gt;
  for (ImageSource& s : rotated.sources) s.position = q * s.position;
  const OrthogonalityScore rscore(rotated);
  for (int i = 0; i < 20; ++i) {
    const Vec3 u = testing::RandomUnit(rng);
    if (score.J3(u, 0.01) != score.J3(-u, 0.01) ||
        std::abs(rscore.J3(q * u, 0.01) - score.J3(u, 0.01)) > 1e-9) {
      broken.push_back("J3 equivariance");
      break;
    }
  }
  const RecoveredRoom r0 = RecoverRoom(gt, Basis{});
  const RecoveredRoom r1 =
      RecoverRoom(rotated, Basis{q.column(0), q.column(1), q.column(2)});
  if ((r0.dims - r1.dims).norm() > 1e-12 ||
      (q * r0.source - r1.source).norm() > 1e-12) {
    broken.push_back("recovery frame covariance");
  }

  // Fusion and round-trip identities.
  ImageSourceCloud pair;
  pair.sources = {Single(Vec3::Zero(), 1.0)[0], Single(Vec3(0.04, 0, 0), 3.0)[0]};
  const FusedSource f = Fuse(0, pair, 0.05);
  if (f.source.amplitude != 4.0 || std::abs(f.source.position.x() - 0.03) > 1e-15) {
    broken.push_back("fusion example");
  }
  for (int w = 0; w < 6; ++w) {
    if (std::abs(r0.absorptions[w] - ref.walls.absorption(w)) > 1e-12) {
      broken.push_back("recovery round trip");
      break;
    }
  }
  for (int i = 0; i < 100; ++i) {
    const Vec3 p = Draw(rng, -10, 10);
    if ((RoomToArray(ArrayToRoom(p, r0), r0) - p).norm() > 1e-12) {
      broken.push_back("frame round trip");
      break;
    }
  }

  // Batch determinism across worker counts.
  auto batch = [](int workers) {
    std::vector<std::string> out(6);
    ParallelFor(
        6,
        [&](int i) {
          const Scene s = RandomScene(SceneDistribution{}, MixSeed(909, i));
          const ImageSourceCloud c = EnumerateImageSources(s, 2, 1e9);
          const RecoveredRoom r = RecoverRoom(c, EstimateOrientation(c));
          out[i] = DumpJson(RoomRecordToJson(EvaluateRoom(r, s)));
        },
        workers);
    return out;
  };
  if (batch(1) != batch(0) || batch(1) != batch(3)) {
    broken.push_back("batch determinism");
  }

  std::string detail = "gradients, equivariances, fusion, round trips, determinism";
  if (!broken.empty()) {
    detail = "broken:";
    for (const std::string& b : broken) detail += " [" + b + "]";
  }
  return {broken.empty(), detail};
}

}  // namespace
}  // namespace shoebox

int main(int argc, char** argv) {
  using shoebox::Outcome;
  CLI::App app{"Acceptance criteria for the shoebox inversion pipeline"};
  std::vector<int> only;
  app.add_option("--only", only, "criteria to run (default: all)")
      ->delimiter(',')
      ->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);
  const std::set<int> selected =
      only.empty() ? std::set<int>{1, 2, 3, 4, 5, 6, 7, 8}
                   : std::set<int>(only.begin(), only.end());

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"orthogonality oracle on complete grids", shoebox::GridOracle},
      {"oracle-cloud orientation and recovery round trip", shoebox::OracleRoundTrip},
      {"forward-model regression fixtures", shoebox::ForwardModelRegression},
      {"single-source super-resolution", shoebox::SuperResolution},
      {"desk-scale end-to-end (16 kHz, noiseless)", shoebox::DeskScale},
      {"RIR extrapolation SER", shoebox::Extrapolation},
      {"noise robustness (24 kHz, 25 dB PSNR)", shoebox::NoiseRobustness},
      {"property suites", shoebox::PropertySuites},
  };
  int failed = 0;
  for (int k = 1; k <= 8; ++k) {
    if (!selected.count(k)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k - 1].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    if (!o.pass) ++failed;
    std::printf("CRITERION %d %s: %s -- %s [%.1f s]\n", k, o.pass ? "PASS" : "FAIL",
                criteria[k - 1].first, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
