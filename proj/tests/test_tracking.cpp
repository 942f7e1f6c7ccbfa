#include <gtest/gtest.h>

#include "test_support.hpp"

namespace roc_pose {
namespace {

SceneBundle orbit(int frames, std::uint64_t seed, double gap = 60.0) {
  OrbitSpec spec;
  spec.kind = ObjectKind::kBlob;
  spec.frames = frames;
  spec.gap_deg = gap;
  spec.samples = 256;
  spec.rgb = false;
  spec.seed = seed;
  return generate_orbit_bundle(spec);
}

TEST(Tracking, ZeroCorruptionRecoversEveryFrame) {
  const auto b = orbit(30, 1);
  const auto run = track_sequence(b, {});
  ASSERT_EQ(run.frames.size(), 30u);
  for (const auto &f : run.frames) {
    ASSERT_TRUE(f.estimate.has_value());
    EXPECT_LT(testing::rotation_error_rad(f.estimate->pose, f.gt_relative), 1e-8);
  }
  const auto s = summarize_track(run, b);
  EXPECT_NEAR(s.report.aggregates.add_auc, 100.0, 1e-6);
  EXPECT_NEAR(s.report.aggregates.adds_auc, 100.0, 1e-6);
  EXPECT_EQ(s.miss_rate, 0.0);
}

TEST(Tracking, MissOnOneFrameLeavesNeighboursUnchanged) {
  auto b = orbit(6, 2);
  CorruptionConfig cfg;
  cfg.coord_noise_sigma = 0.005;
  cfg.seed = 9;
  const auto base = track_sequence(b, cfg);
  // An empty query mask makes frame 3 a miss.
  b.frames[3].mask = MaskImage(b.intrinsics.width, b.intrinsics.height, 0);
  b.frames[3].depth = DepthImage(b.intrinsics.width, b.intrinsics.height, 0.0f);
  const auto run = track_sequence(b, cfg);
  EXPECT_FALSE(run.frames[3].estimate.has_value());
  EXPECT_FALSE(run.frames[3].failure.empty());
  for (int i : {2, 4}) {
    ASSERT_TRUE(run.frames[i].estimate.has_value());
    EXPECT_EQ(run.frames[i].estimate->pose.matrix(), base.frames[i].estimate->pose.matrix());
  }
  const auto s = summarize_track(run, b);
  EXPECT_TRUE(s.report.per_frame[3].miss);
  EXPECT_NEAR(s.miss_rate, 100.0 / 6.0, 1e-12);
}

TEST(Tracking, AllMissRun) {
  const auto b = orbit(4, 3);
  CorruptionConfig cfg;
  cfg.pixel_dropout = 1.0;
  const auto s = summarize_track(track_sequence(b, cfg), b);
  EXPECT_EQ(s.report.aggregates.add_auc, 0.0);
  EXPECT_EQ(s.report.aggregates.adds_auc, 0.0);
  EXPECT_EQ(s.miss_rate, 100.0);
}

TEST(Tracking, ResultsIndependentOfJobsAndFrameOrder) {
  auto b = orbit(8, 4);
  CorruptionConfig cfg;
  cfg.coord_noise_sigma = 0.01;
  cfg.pixel_dropout = 0.2;
  cfg.seed = 5;
  TrackOptions opt;
  opt.estimate.solver = SolverMethod::kRansacPnp;
  opt.estimate.ransac.iterations = 64;
  opt.estimate.ransac.inlier_px = 3.0;
  const auto a = track_sequence(b, cfg, opt);
  opt.jobs = 3;
  const auto c = track_sequence(b, cfg, opt);
  std::swap(b.frames[2], b.frames[6]);
  const auto d = track_sequence(b, cfg, opt);
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    ASSERT_EQ(a.frames[i].estimate.has_value(), c.frames[i].estimate.has_value());
    if (a.frames[i].estimate)
      EXPECT_EQ(a.frames[i].estimate->pose.matrix(), c.frames[i].estimate->pose.matrix());
  }
  ASSERT_TRUE(a.frames[2].estimate && d.frames[6].estimate);
  EXPECT_EQ(a.frames[2].estimate->pose.matrix(), d.frames[6].estimate->pose.matrix());
}

TEST(Tracking, NeedsTwoFramesAndNonEmptyReference) {
  EXPECT_THROW(track_sequence(orbit(1, 5), {}), Error);
  auto b = orbit(3, 6);
  b.frames[0].mask = MaskImage(b.intrinsics.width, b.intrinsics.height, 0);
  try {
    track_sequence(b, {});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerateCloud);
  }
}

}  // namespace
}  // namespace roc_pose
