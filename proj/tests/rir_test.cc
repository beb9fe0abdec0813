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

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "shoebox/errors.h"
#include "shoebox/forward_model.h"
#include "shoebox/image_sources.h"
#include "shoebox/metrics.h"
#include "shoebox/recovered_room.h"
#include "shoebox/rir.h"
#include "shoebox/scene.h"
#include "test_util.h"

namespace shoebox {
namespace {

constexpr double kPi = std::numbers::pi;

MicArray Tetrahedron() {
  return MicArray("tetra", {Vec3(0.05, 0.05, 0.05), Vec3(-0.05, -0.05, 0.05),
                            Vec3(-0.05, 0.05, -0.05), Vec3(0.05, -0.05, -0.05)});
}

ImageSourceCloud Single(const Vec3& p, double a = 1.0) {
  ImageSourceCloud c;
  ImageSource s;
  s.position = p;
  s.amplitude = a;
  c.sources.push_back(s);
  return c;
}

ImageSourceCloud RandomCloud(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> r(1.0, 15.0), a(0.05, 1.0);
  ImageSourceCloud c;
  for (int k = 0; k < n; ++k) {
    ImageSource s;
    s.position = r(rng) * testing::RandomUnit(rng);
    s.amplitude = a(rng);
    c.sources.push_back(s);
  }
  return c;
}

TEST(SynthesizeTest, OnGridPeak) {
  const MicArray array = Tetrahedron();
  const Vec3 source = array[0] + Vec3(3.43, 0, 0);
  const MultichannelRir rir = SynthesizeRir(Single(source), array, 16000, 0.05);
  ASSERT_EQ(rir.length(), 800);
  Eigen::Index arg;
  const double peak = rir.samples.row(0).maxCoeff(&arg);
  EXPECT_EQ(arg, 160);
  EXPECT_NEAR(peak, 1.0 / (4.0 * kPi * 3.43), 1e-15);
  // Every other integer sample sits on a zero of the sinc.
  for (int n = 0; n < 800; ++n) {
    if (n == 160) continue;
    EXPECT_LT(std::abs(rir.samples(0, n)), 1e-16);
  }
}

TEST(SynthesizeTest, SampleCount) {
  EXPECT_EQ(NumSamples(16000, 0.05), 800);
  EXPECT_EQ(NumSamples(24000, 0.05), 1200);
  EXPECT_THROW(NumSamples(0, 0.05), ValidationError);
}

TEST(SynthesizeTest, Linearity) {
  std::mt19937_64 rng(1);
  const ImageSourceCloud a = RandomCloud(rng, 30);
  const ImageSourceCloud b = RandomCloud(rng, 30);
  const double alpha = 0.7, beta = 2.3;
  ImageSourceCloud mix;
  for (ImageSource s : a.sources) {
    s.amplitude *= alpha;
    mix.sources.push_back(s);
  }
  for (ImageSource s : b.sources) {
    s.amplitude *= beta;
    mix.sources.push_back(s);
  }
  const MicArray array = MicArray::Em32();
  const RowMatrix lhs = SynthesizeRir(mix, array, 16000, 0.05).samples;
  const RowMatrix rhs = alpha * SynthesizeRir(a, array, 16000, 0.05).samples +
                        beta * SynthesizeRir(b, array, 16000, 0.05).samples;
  EXPECT_LT((lhs - rhs).norm(), 1e-12 * rhs.norm());

  ImageSourceCloud doubled = a;
  for (ImageSource& s : doubled.sources) s.amplitude *= 2.0;
  EXPECT_LT((SynthesizeRir(doubled, array, 16000, 0.05).samples -
             2.0 * SynthesizeRir(a, array, 16000, 0.05).samples)
                .norm(),
            1e-14);
}

TEST(SynthesizeTest, SwappingSourceAndMicrophone) {
  const MicArray a = Tetrahedron();
  const Vec3 source(1.3, -0.8, 2.1);
  const MultichannelRir x = SynthesizeRir(Single(source), a, 16000, 0.05);
  // Second array whose first element sits where the source was.
  std::vector<Vec3> raw;
  for (const Vec3& p : a.positions()) raw.push_back(source + (p - a[0]));
  const MicArray b("swapped", raw);
  const Vec3 shift = source - b[0];
  const MultichannelRir y = SynthesizeRir(Single(a[0] - shift), b, 16000, 0.05);
  EXPECT_LT((x.samples.row(0) - y.samples.row(0)).cwiseAbs().maxCoeff(),
            1e-13 * x.samples.row(0).cwiseAbs().maxCoeff());
}

TEST(SynthesizeTest, SampleGridShift) {
  const MicArray array = Tetrahedron();
  const double fs = 16000;
  const Vec3 dir = Vec3(0.3, 0.5, -0.2).normalized();
  const double r1 = 2.1234;
  const int k = 7;
  const double r2 = r1 + k * kSpeedOfSound / fs;
  const auto x1 = SynthesizeRir(Single(array[0] + r1 * dir), array, fs, 0.05);
  const auto x2 = SynthesizeRir(Single(array[0] + r2 * dir), array, fs, 0.05);
  for (int n = k; n < x1.length(); ++n) {
    EXPECT_NEAR(x2.samples(0, n) * r2 / r1, x1.samples(0, n - k), 1e-15);
  }
}

TEST(SynthesizeTest, CoincidentSourceThrows) {
  const MicArray array = Tetrahedron();
  EXPECT_THROW(SynthesizeRir(Single(array[2]), array, 16000, 0.05),
               SingularityError);
  EXPECT_THROW(SynthesizeRir(ImageSourceCloud{}, array, 16000, 0.05),
               ValidationError);
}

TEST(SimulateTest, CompositionOfEnumerateAndSynthesize) {
  const Scene s = testing::AxisAlignedScene(Vec3(2, 2, 2), Vec3(1.8, 1.8, 1.7),
                                            Vec3(0.6, 0.5, 0.6), 0.0);
  const MultichannelRir direct = SimulateSceneRir(s, 16000, 0.05);
  const ImageSourceCloud c = EnumerateImageSources(
      s, kSimulationOrder, SimulationRadius(s.array, 16000, 0.05));
  const MultichannelRir composed = SynthesizeRir(c, s.array, 16000, 0.05);
  EXPECT_EQ((direct.samples - composed.samples).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SimulateTest, GuardMargin) {
  const MicArray array = MicArray::Em32();
  const double fs = 16000, duration = 0.05;
  const double edge = kSpeedOfSound * duration;
  const double step = kSpeedOfSound / fs;
  const Vec3 dir = Vec3(1, 2, 3).normalized();
  // Inside the guard band: contributes, and is enumerated.
  const double inside = edge + 9.5 * step;
  EXPECT_LT(inside + array.radius(), SimulationRadius(array, fs, duration));
  EXPECT_GT(SynthesizeRir(Single(inside * dir), array, fs, duration)
                .samples.cwiseAbs()
                .maxCoeff(),
            0.0);
  // Beyond it: bounded by the sinc tail a / (4 pi r) / (pi dn).
  const double beyond = SimulationRadius(array, fs, duration) + 0.01;
  const auto x = SynthesizeRir(Single(beyond * dir), array, fs, duration);
  for (int m = 0; m < array.size(); ++m) {
    const double d = (beyond * dir - array[m]).norm();
    const double dn = d * fs / kSpeedOfSound - (x.length() - 1);
    ASSERT_GT(dn, 10.0);
    EXPECT_LE(x.samples.row(m).cwiseAbs().maxCoeff(),
              1.0 / (4 * kPi * d) / (kPi * dn) * (1 + 1e-12));
  }
}

TEST(SimulateTest, EnergyDecreasesWithAbsorption) {
  Scene s = testing::ReferenceScene(0.1);
  const RowMatrix base = SimulateSceneRir(s, 16000, 0.05).samples;
  std::array<double, 6> alpha = s.walls.absorptions();
  alpha[3] = 0.4;
  s.walls = WallSet(alpha);
  const RowMatrix more = SimulateSceneRir(s, 16000, 0.05).samples;
  ASSERT_TRUE(base.allFinite());
  for (int m = 0; m < base.rows(); ++m) {
    EXPECT_LT(more.row(m).squaredNorm(), base.row(m).squaredNorm());
  }
}

TEST(NoiseTest, InfinitePsnrIsIdentity) {
  const MultichannelRir x = SimulateSceneRir(testing::ReferenceScene(), 16000, 0.05);
  const MultichannelRir y = AddNoisePsnr(x, NoiseSpec{});
  EXPECT_EQ((x.samples - y.samples).cwiseAbs().maxCoeff(), 0.0);
}

TEST(NoiseTest, StandardDeviationMatchesPsnr) {
  MultichannelRir x;
  x.samples = RowMatrix::Zero(4, 50000);
  x.samples(0, 0) = 1.0;
  const MultichannelRir y = AddNoisePsnr(x, NoiseSpec{25.0, 3});
  const RowMatrix noise = y.samples - x.samples;
  const double std = std::sqrt(noise.squaredNorm() / noise.size());
  EXPECT_NEAR(std, std::pow(10.0, -25.0 / 20.0), 0.03 * 0.05623);

  const MultichannelRir z = AddNoisePsnr(x, NoiseSpec{25.0, 4});
  EXPECT_GT((z.samples - y.samples).cwiseAbs().maxCoeff(), 0.0);
  const double std_z =
      std::sqrt((z.samples - x.samples).squaredNorm() / noise.size());
  EXPECT_NEAR(std_z, std, 0.03 * std);
  const MultichannelRir again = AddNoisePsnr(x, NoiseSpec{25.0, 3});
  EXPECT_EQ((again.samples - y.samples).cwiseAbs().maxCoeff(), 0.0);
}

TEST(NoiseTest, ZeroRirThrows) {
  MultichannelRir x;
  x.samples = RowMatrix::Zero(2, 10);
  EXPECT_THROW(AddNoisePsnr(x, NoiseSpec{20.0, 1}), ValidationError);
}

TEST(ExtrapolateTest, ExactParametersSamePlacement) {
  const Scene s = RandomScene(SceneDistribution{}, 21);
  const Placement same{s.source, ArrayPose{}};
  const MultichannelRir a = SimulateSceneRir(s, 16000, 0.05);
  const MultichannelRir b =
      ExtrapolateRir(RecoveredFromScene(s), same, s.array, 16000, 0.05);
  EXPECT_LT((a.samples - b.samples).cwiseAbs().maxCoeff(),
            1e-12 * a.samples.cwiseAbs().maxCoeff());
}

TEST(ExtrapolateTest, ExactParametersNewPlacementHitsCap) {
  const Scene s = RandomScene(SceneDistribution{}, 22);
  const Placement p = RandomPlacement(s, 5);
  const MultichannelRir truth = SimulateSceneRir(PlaceInScene(s, p), 16000, 0.05);
  const MultichannelRir est =
      ExtrapolateRir(RecoveredFromScene(s), p, s.array, 16000, 0.05);
  EXPECT_EQ(Ser(est, truth), kDefaultSerCapDb);
}

TEST(ExtrapolateTest, SerDecreasesWithDimensionError) {
  const Scene s = RandomScene(SceneDistribution{}, 23);
  const Placement p = RandomPlacement(s, 6);
  const MultichannelRir truth = SimulateSceneRir(PlaceInScene(s, p), 16000, 0.05);
  double previous = kDefaultSerCapDb;
  for (double cm : {1.0, 2.0, 4.0}) {
    RecoveredRoom r = RecoveredFromScene(s);
    r.dims[0] += cm / 100.0;
    const double ser = Ser(ExtrapolateRir(r, p, s.array, 16000, 0.05), truth);
    EXPECT_TRUE(std::isfinite(ser));
    EXPECT_LT(ser, previous) << cm;
    previous = ser;
  }
}

TEST(RirIoTest, BinaryRoundTripIsExact) {
  const MultichannelRir x = SimulateSceneRir(testing::ReferenceScene(), 16000, 0.05);
  const std::string base =
      (std::filesystem::temp_directory_path() / "shoebox_rir_io_test").string();
  WriteRir(x, base, "fixture");
  const MultichannelRir y = ReadRir(base);
  EXPECT_EQ(y.length(), 800);
  EXPECT_EQ(y.channels(), 32);
  EXPECT_EQ(y.fs, 16000);
  EXPECT_EQ((x.samples - y.samples).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(ReadRir(base + "_missing"), IoError);
}

TEST(ForwardModelTest, SignatureMatchesSynthesis) {
  const MicArray array = MicArray::Em32();
  const ForwardModel model(array, 16000, 800);
  const Vec3 r(1.7, -2.2, 0.4);
  const std::vector<double> sig = model.Signature(r);
  const MultichannelRir x = SynthesizeRir(Single(r), array, 16000, 0.05);
  for (int m = 0; m < 32; ++m) {
    for (int n = 0; n < 800; ++n) {
      ASSERT_NEAR(sig[m * 800 + n], x.samples(m, n), 1e-15);
    }
  }
}

TEST(ForwardModelTest, CorrelateMatchesInnerProductAndGradient) {
  const MicArray array = MicArray::Em32();
  const ForwardModel model(array, 16000, 800);
  std::mt19937_64 rng(8);
  const MultichannelRir x = SynthesizeRir(RandomCloud(rng, 20), array, 16000, 0.05);
  const std::span<const double> res(x.samples.data(), x.samples.size());
  const Vec3 r(2.0, 1.1, -0.7);
  const std::vector<double> sig = model.Signature(r);
  double dot = 0.0;
  for (size_t i = 0; i < sig.size(); ++i) dot += sig[i] * res[i];
  Vec3 g;
  EXPECT_NEAR(model.Correlate(res, r, &g), dot, 1e-14);
  const double h = 1e-6;
  for (int t = 0; t < 3; ++t) {
    Vec3 e = Vec3::Zero();
    e[t] = h;
    const double fd = (model.Correlate(res, r + e) - model.Correlate(res, r - e)) / (2 * h);
    EXPECT_NEAR(g[t], fd, 1e-5 * std::max(1.0, std::abs(fd)) * g.norm());
  }
}

TEST(ForwardModelTest, FftInterpolatorMatchesDirectTable) {
  const MicArray array = MicArray::Em32();
  const ForwardModel model(array, 16000, 800);
  std::mt19937_64 rng(9);
  const MultichannelRir x = SynthesizeRir(RandomCloud(rng, 15), array, 16000, 0.05);
  const std::span<const double> res(x.samples.data(), x.samples.size());
  const SincInterpolator interp(32, 800, 8, 820);
  const RowMatrix fast = interp.Table(res);
  const RowMatrix direct = model.InterpolationTable(res, 8, 820);
  ASSERT_EQ(fast.rows(), direct.rows());
  ASSERT_EQ(fast.cols(), direct.cols());
  EXPECT_LT((fast - direct).cwiseAbs().maxCoeff(),
            1e-12 * direct.cwiseAbs().maxCoeff());
}

}  // namespace
}  // namespace shoebox
