#include <gtest/gtest.h>

#include <numbers>

#include "test_support.hpp"

namespace roc_pose {
namespace {

using testing::random_pose;

CameraIntrinsics camera500() { return {500.0, 500.0, 320.0, 240.0, 640, 480}; }

TEST(Backproject, PrincipalPointIsOpticalAxis) {
  const auto k = camera500();
  DepthImage depth(640, 480, 0.0f);
  MaskImage mask(640, 480, 0);
  depth(320, 240) = 2.0f;
  mask(320, 240) = 1;
  const auto bp = backproject(depth, mask, k);
  ASSERT_EQ(bp.points.size(), 1u);
  EXPECT_EQ(bp.points[0], Vec3(0, 0, 2.0));
  EXPECT_EQ(bp.pixels[0], (PixelIndex{320, 240}));
}

TEST(Backproject, OffAxisPixel) {
  // u = cx + 500 lies outside a 640-wide image, so use a wider sensor.
  const CameraIntrinsics k{500.0, 500.0, 320.0, 240.0, 1000, 480};
  DepthImage depth(1000, 480, 0.0f);
  MaskImage mask(1000, 480, 0);
  depth(820, 240) = 1.0f;
  mask(820, 240) = 1;
  const auto bp = backproject(depth, mask, k);
  ASSERT_EQ(bp.points.size(), 1u);
  EXPECT_DOUBLE_EQ(bp.points[0].x(), 1.0);
  EXPECT_DOUBLE_EQ(bp.points[0].y(), 0.0);
  EXPECT_DOUBLE_EQ(bp.points[0].z(), 1.0);
}

TEST(Backproject, EmptyMaskGivesEmptyCloud) {
  const auto k = camera500();
  const auto bp = backproject(DepthImage(640, 480, 1.0f), MaskImage(640, 480, 0), k);
  EXPECT_TRUE(bp.points.empty());
  EXPECT_TRUE(bp.pixels.empty());
}

TEST(Backproject, ZeroDepthExcludedEvenWhenMasked) {
  const auto k = camera500();
  DepthImage depth(640, 480, 0.0f);
  MaskImage mask(640, 480, 1);
  depth(5, 7) = 1.5f;
  const auto bp = backproject(depth, mask, k);
  ASSERT_EQ(bp.points.size(), 1u);
  EXPECT_EQ(bp.pixels[0], (PixelIndex{5, 7}));
}

TEST(Backproject, DimensionMismatchThrows) {
  const auto k = camera500();
  EXPECT_THROW(backproject(DepthImage(640, 480), MaskImage(64, 48), k), Error);
  EXPECT_THROW(backproject(DepthImage(64, 48), MaskImage(64, 48), k), Error);
}

TEST(Backproject, RowMajorOrder) {
  const auto f = testing::plane_frame();
  const auto bp = backproject(f);
  for (std::size_t i = 1; i < bp.pixels.size(); ++i) {
    const auto a = bp.pixels[i - 1], b = bp.pixels[i];
    EXPECT_TRUE(a.v < b.v || (a.v == b.v && a.u < b.u));
  }
}

TEST(Project, PrincipalPoint) {
  const auto k = camera500();
  const auto p = project({Vec3(0, 0, 1)}, Pose::identity(), k);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_TRUE(p[0].in_view);
  EXPECT_DOUBLE_EQ(p[0].uv.x(), 320.0);
  EXPECT_DOUBLE_EQ(p[0].uv.y(), 240.0);
}

TEST(Project, DegenerateDepthAndOutOfImageFlagged) {
  const auto k = camera500();
  const auto p = project({Vec3(0, 0, 0), Vec3(0, 0, -1), Vec3(10, 0, 1)},
                         Pose::identity(), k);
  ASSERT_EQ(p.size(), 3u);
  for (const auto &x : p) EXPECT_FALSE(x.in_view);
}

TEST(Project, RoundTripReproducesMaskPixels) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    SceneFrame f = testing::plane_frame();
    for (auto &d : f.depth.data()) d = d > 0 ? static_cast<float>(uniform(rng, 0.3, 4.0)) : 0.0f;
    const auto bp = backproject(f);
    const auto proj = project(bp.points, Pose::identity(), f.intrinsics);
    for (std::size_t i = 0; i < proj.size(); ++i) {
      ASSERT_TRUE(proj[i].in_view);
      EXPECT_LT(std::abs(proj[i].uv.x() - bp.pixels[i].u), 0.5);
      EXPECT_LT(std::abs(proj[i].uv.y() - bp.pixels[i].v), 0.5);
      EXPECT_EQ(proj[i].nearest(), bp.pixels[i]);
    }
  }
}

TEST(Pose, ComposeWithIdentity) {
  Rng rng(1);
  const Pose p = random_pose(rng);
  const Pose q = compose(p, Pose::identity());
  EXPECT_LT((q.matrix() - p.matrix()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Pose, InverseComposesToIdentity) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const Pose p = random_pose(rng);
    EXPECT_LT((compose(invert(p), p).matrix() - Mat4::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((compose(p, invert(p)).matrix() - Mat4::Identity()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Pose, TwoQuarterTurnsMakeHalfTurn) {
  const Pose r90 = Pose::from_axis_angle(Vec3::UnitZ(), std::numbers::pi / 2);
  const Pose r180 = compose(r90, r90);
  Mat3 expected;
  expected << -1, 0, 0, 0, -1, 0, 0, 0, 1;
  EXPECT_LT((r180.rotation - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Pose, AssociativityAndInvolution) {
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const Pose a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
    const Mat4 left = compose(compose(a, b), c).matrix();
    const Mat4 right = compose(a, compose(b, c)).matrix();
    EXPECT_LT((left - right).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((invert(invert(a)).matrix() - a.matrix()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Pose, AxisAngleIsProperRotation) {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const Pose p = Pose::from_axis_angle(Vec3(uniform(rng, -1, 1), uniform(rng, -1, 1),
                                              uniform(rng, -1, 1)),
                                         uniform(rng, -10, 10));
    EXPECT_TRUE(p.is_valid());
    EXPECT_NEAR(p.rotation.determinant(), 1.0, 1e-12);
  }
  EXPECT_TRUE(Pose::from_axis_angle(Vec3::Zero(), 1.0).is_valid());
}

TEST(Pose, RotationAngleNearIdentityAndHalfTurn) {
  EXPECT_NEAR(rotation_angle(Pose::from_axis_angle(Vec3::UnitX(), 1e-10).rotation), 1e-10,
              1e-20);
  EXPECT_NEAR(rotation_angle(Pose::from_axis_angle(Vec3(1, 2, 3), std::numbers::pi).rotation),
              std::numbers::pi, 1e-12);
}

TEST(Intrinsics, Validation) {
  EXPECT_TRUE(camera500().is_valid());
  EXPECT_FALSE((CameraIntrinsics{0, 500, 320, 240, 640, 480}.is_valid()));
  EXPECT_FALSE((CameraIntrinsics{500, 500, 640, 240, 640, 480}.is_valid()));
  EXPECT_FALSE((CameraIntrinsics{500, 500, -1, 240, 640, 480}.is_valid()));
}

}  // namespace
}  // namespace roc_pose
