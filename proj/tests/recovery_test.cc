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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "shoebox/errors.h"
#include "shoebox/image_sources.h"
#include "shoebox/recovered_room.h"
#include "shoebox/recovery.h"
#include "shoebox/scene.h"
#include "test_util.h"

namespace shoebox {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

ImageSource At(const Vec3& p, double a = 1.0) {
  ImageSource s;
  s.position = p;
  s.amplitude = a;
  return s;
}

ImageSourceCloud Cloud(std::initializer_list<ImageSource> s) {
  ImageSourceCloud c;
  c.sources = s;
  return c;
}

TEST(IdentifyTrueSourceTest, GroundTruthAndSingleton) {
  const ImageSourceCloud c = EnumerateImageSources(testing::ReferenceScene(), 2, 1e3);
  const int k = IdentifyTrueSource(c);
  EXPECT_EQ(c[k].order.value(), 0);
  EXPECT_EQ(IdentifyTrueSource(Cloud({At(Vec3(3, 0, 0))})), 0);
  EXPECT_THROW(IdentifyTrueSource(ImageSourceCloud{}), ValidationError);
}

TEST(IdentifyTrueSourceTest, TieIsAmbiguous) {
  EXPECT_THROW(
      IdentifyTrueSource(Cloud({At(Vec3(2, 0, 0)), At(Vec3(0, 2, 0)),
                                At(Vec3(5, 0, 0))})),
      DegenerateInputError);
}

TEST(IdentifyTrueSourceTest, RobustToJitterOverTheSceneDistribution) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.005 / std::sqrt(3.0),
                                           0.005 / std::sqrt(3.0));
  for (int i = 0; i < 200; ++i) {
    const Scene s = RandomScene(SceneDistribution{}, MixSeed(11, i));
    ImageSourceCloud c = EnumerateImageSources(s, 2, 1e3);
    for (ImageSource& src : c.sources) src.position += Vec3(u(rng), u(rng), u(rng));
    EXPECT_EQ(c[IdentifyTrueSource(c)].order.value(), 0) << i;
  }
}

TEST(FuseTest, Examples) {
  const ImageSourceCloud single = Cloud({At(Vec3(1, 2, 3), 0.7), At(Vec3(4, 2, 3))});
  const FusedSource a = Fuse(0, single, 0.05);
  EXPECT_EQ(a.source.amplitude, 0.7);
  EXPECT_EQ(a.source.position, Vec3(1, 2, 3));
  EXPECT_EQ(a.members, std::vector<int>({0}));

  const ImageSourceCloud pair = Cloud({At(Vec3(0, 0, 0), 1.0), At(Vec3(0.04, 0, 0), 3.0)});
  const FusedSource b = Fuse(0, pair, 0.05);
  EXPECT_DOUBLE_EQ(b.source.amplitude, 4.0);
  EXPECT_NEAR(b.source.position.x(), 0.03, 1e-15);
  EXPECT_EQ(b.members, std::vector<int>({0, 1}));
  EXPECT_THROW(Fuse(0, pair, 0.0), ValidationError);
}

TEST(FuseTest, PermutationInvariantAndIdempotent) {
  std::mt19937_64 rng(2);
  ImageSourceCloud c;
  std::uniform_real_distribution<double> a(0.1, 1.0);
  for (int i = 0; i < 8; ++i) {
    c.sources.push_back(At(Vec3(2, 0, 0) + 0.02 * testing::RandomUnit(rng), a(rng)));
  }
  c.sources.push_back(At(Vec3(-3, 1, 0)));
  const FusedSource ref = Fuse(0, c, 0.05);
  for (int trial = 0; trial < 10; ++trial) {
    ImageSourceCloud shuffled = c;
    std::shuffle(shuffled.sources.begin(), shuffled.sources.end(), rng);
    int start = 0;
    while (shuffled[start].position != c[0].position) ++start;
    const FusedSource f = Fuse(start, shuffled, 0.05);
    EXPECT_NEAR(f.source.amplitude, ref.source.amplitude, 1e-14);
    EXPECT_LT((f.source.position - ref.source.position).norm(), 1e-14);
  }
  ImageSourceCloud fused = Cloud({ref.source, At(Vec3(-3, 1, 0))});
  const FusedSource again = Fuse(0, fused, 0.05);
  EXPECT_EQ(again.source.amplitude, ref.source.amplitude);
  EXPECT_EQ(again.source.position, ref.source.position);
}

TEST(ClosestInConeTest, FirstOrderImageAlongTheAxis) {
  const Scene s = testing::ReferenceScene();
  ImageSourceCloud c = EnumerateImageSources(s, 1, 1e3);
  std::vector<bool> excluded(c.size(), false);
  const int src = IdentifyTrueSource(c);
  excluded[src] = true;
  const auto hit = ClosestInCone(c[src].position, Vec3::UnitX(), c,
                                 ConeSearchConfig{}, &excluded);
  ASSERT_TRUE(hit.has_value());
  EXPECT_LT((s.room.ToRoomFrame(c[hit->index].position) - Vec3(7, 2, 1)).norm(),
            1e-12);
  EXPECT_EQ(hit->widenings, 0);
}

TEST(ClosestInConeTest, ConeFilterPrecedesDistance) {
  const Vec3 dir = Vec3::UnitX();
  const Vec3 distractor(std::cos(20 * kDeg), std::sin(20 * kDeg), 0);
  const Vec3 inside(std::cos(10 * kDeg), 0, std::sin(10 * kDeg));
  const ImageSourceCloud c = Cloud({At(distractor), At(5.0 * inside)});
  const auto hit = ClosestInCone(Vec3::Zero(), dir, c, ConeSearchConfig{});
  ASSERT_TRUE(hit.has_value());
  EXPECT_EQ(hit->index, 1);
}

TEST(ClosestInConeTest, WideningSchedule) {
  const Vec3 at40(std::cos(40 * kDeg), std::sin(40 * kDeg), 0);
  const auto hit = ClosestInCone(Vec3::Zero(), Vec3::UnitX(),
                                 Cloud({At(3.0 * at40)}), ConeSearchConfig{});
  ASSERT_TRUE(hit.has_value());
  EXPECT_EQ(hit->widenings, 3);
  EXPECT_NEAR(hit->half_angle / kDeg, 15 * 1.5 * 1.5 * 1.5, 1e-9);
  // Nothing in the forward hemisphere.
  EXPECT_FALSE(ClosestInCone(Vec3::Zero(), Vec3::UnitX(),
                             Cloud({At(Vec3(-1, 0.1, 0))}), ConeSearchConfig{})
                   .has_value());
}

void ExpectExactRecovery(const Scene& s, double tol) {
  const ImageSourceCloud c = EnumerateImageSources(s, 2, 1e3);
  const Basis basis = Basis::FromRotation(s.room.pose);
  const RecoveredRoom r = RecoverRoom(c, basis);
  for (int t = 0; t < 3; ++t) {
    EXPECT_NEAR(r.dims[t], s.room.dims[t], tol);
    EXPECT_NEAR(r.translation[t], s.source_room[t], tol);
    EXPECT_GT(r.translation[t], 0.0);
    EXPECT_LT(r.translation[t], r.dims[t]);
  }
  for (int w = 0; w < 6; ++w) {
    EXPECT_NEAR(r.absorptions[w], s.walls.absorption(w), tol);
  }
  EXPECT_LT((r.source - s.source).norm(), tol);
}

TEST(RecoverRoomTest, ReferenceRoomRoundTrip) {
  const Scene s = testing::ReferenceScene(0.19);
  ExpectExactRecovery(s, 1e-12);
  const RecoveredRoom r =
      RecoverRoom(EnumerateImageSources(s, 2, 1e3), Basis{});
  for (int w = 0; w < 6; ++w) {
    // Unit direct path: normalized and raw amplitudes coincide.
    EXPECT_NEAR(r.raw_amplitudes[w], 0.9, 1e-12);
  }
}

TEST(RecoverRoomTest, RandomScenesRoundTrip) {
  for (int i = 0; i < 50; ++i) {
    ExpectExactRecovery(RandomScene(SceneDistribution{}, MixSeed(3, i)), 1e-10);
  }
}

TEST(RecoverRoomTest, FrameCovariance) {
  std::mt19937_64 rng(4);
  const Scene s = RandomScene(SceneDistribution{}, 99);
  const ImageSourceCloud c = EnumerateImageSources(s, 2, 1e3);
  const Basis basis = Basis::FromRotation(s.room.pose);
  const RecoveredRoom a = RecoverRoom(c, basis);
  const Rotation q = RandomRotation(rng);
  ImageSourceCloud rc = c;
  for (ImageSource& src : rc.sources) src.position = q * src.position;
  const Basis rb{q * basis.e1, q * basis.e2, q * basis.e3};
  const RecoveredRoom b = RecoverRoom(rc, rb);
  EXPECT_LT((a.dims - b.dims).norm(), 1e-12);
  EXPECT_LT((a.translation - b.translation).norm(), 1e-12);
  EXPECT_LT((q * a.source - b.source).norm(), 1e-12);
  for (int w = 0; w < 6; ++w) EXPECT_NEAR(a.absorptions[w], b.absorptions[w], 1e-12);
}

TEST(RecoverRoomTest, AmplitudeScaleInvariance) {
  const Scene s = RandomScene(SceneDistribution{}, 98);
  ImageSourceCloud c = EnumerateImageSources(s, 2, 1e3);
  const Basis basis = Basis::FromRotation(s.room.pose);
  const RecoveredRoom a = RecoverRoom(c, basis);
  for (ImageSource& src : c.sources) src.amplitude *= 3.7;
  const RecoveredRoom b = RecoverRoom(c, basis);
  for (int w = 0; w < 6; ++w) EXPECT_NEAR(a.absorptions[w], b.absorptions[w], 1e-12);
}

TEST(RecoverRoomTest, MissingReflectionNamesTheWall) {
  const Scene s = testing::ReferenceScene();
  ImageSourceCloud c;
  for (const ImageSource& src : EnumerateImageSources(s, 1, 1e3).sources) {
    // Drop the image behind the far x wall and everything beyond it.
    if (s.room.ToRoomFrame(src.position).x() < 4.0) c.sources.push_back(src);
  }
  try {
    RecoverRoom(c, Basis{});
    FAIL() << "expected a missing reflection";
  } catch (const MissingReflectionError& e) {
    EXPECT_EQ(e.axis(), 0);
    EXPECT_TRUE(e.positive_side());
  }
}

TEST(RoomCenterTest, Examples) {
  RecoveredRoom r;
  r.dims = Vec3(4, 5, 3);
  r.translation = r.dims / 2.0;
  EXPECT_LT(RoomCenterInArrayFrame(r).norm(), 1e-15);

  const Scene s = RandomScene(SceneDistribution{}, 97);
  const RecoveredRoom g = RecoveredFromScene(s);
  const Vec3 center = RoomCenterInArrayFrame(g);
  EXPECT_LT((center - (s.room.corner_origin +
                       s.room.pose.matrix() * (s.room.dims / 2.0)))
                .norm(),
            1e-12);
  EXPECT_LT((ArrayToRoom(center, g) - g.dims / 2.0).norm(), 1e-12);
}

TEST(RecoveryConfigTest, Validation) {
  RecoveryConfig cfg;
  EXPECT_NO_THROW(cfg.Validate());
  cfg.cone.widen_factor = 1.0;
  EXPECT_THROW(cfg.Validate(), ValidationError);
  cfg = RecoveryConfig{};
  cfg.cone.initial_half_angle = 2.0;
  EXPECT_THROW(cfg.Validate(), ValidationError);
  cfg = RecoveryConfig{};
  cfg.mu = 0.0;
  EXPECT_THROW(cfg.Validate(), ValidationError);
}

}  // namespace
}  // namespace shoebox
