#include <gtest/gtest.h>

#include "test_support.hpp"

namespace roc_pose {
namespace {

MaskImage mask2x2(std::initializer_list<int> bits) {
  MaskImage m(2, 2, 0);
  int i = 0;
  for (int b : bits) m.data()[i++] = static_cast<std::uint8_t>(b);
  return m;
}

TEST(Miou, Anchors) {
  const auto a = mask2x2({1, 1, 0, 0});
  EXPECT_DOUBLE_EQ(miou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(miou(a, mask2x2({0, 0, 1, 1})), 0.0);
  EXPECT_DOUBLE_EQ(miou(a, mask2x2({0, 1, 1, 0})), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(miou(mask2x2({0, 0, 0, 0}), mask2x2({0, 0, 0, 0})), 0.0);
  EXPECT_THROW(miou(a, MaskImage(3, 2, 0)), Error);
}

TEST(ReprojectMask, EmptyAndBehindCamera) {
  const auto k = default_intrinsics();
  EXPECT_EQ(count_nonzero(reproject_mask({}, Pose::identity(), k)), 0u);
  EXPECT_EQ(count_nonzero(reproject_mask({Vec3(0, 0, -1), Vec3(0.1, 0, -2)}, Pose::identity(), k)),
            0u);
}

TEST(ReprojectMask, SelfConsistency) {
  const auto s = testing::make_multiview_scene(3, 4, 0, 0.0);
  for (const auto &ref : s.refs.frames) {
    const PointCloud world = lift_to_world(ref, ref.world_pose);
    EXPECT_GT(miou(reproject_mask(world, ref.world_pose, ref.intrinsics), ref.mask), 0.99);
  }
}

TEST(LiftToWorld, IdentityPoseIsCameraCloud) {
  const auto f = testing::plane_frame();
  EXPECT_EQ(lift_to_world(f, Pose::identity()), backproject(f).points);
}

TEST(LiftToWorld, PerfectEstimateMatchesObjectSurface) {
  const auto s = testing::make_multiview_scene(4, 2, 0, 20.0);
  const Pose world = candidate_world_pose(s.refs.candidate_estimates[0], s.refs.frames[0]);
  EXPECT_LT((world.matrix() - s.query.world_pose.matrix()).cwiseAbs().maxCoeff(), 1e-9);
  const auto cloud = lift_to_world(s.query, world);
  // Every lifted point lies within the object's bounding box.
  for (const auto &p : cloud) EXPECT_LT(p.cwiseAbs().maxCoeff(), 0.08);
}

TEST(Vote, SingleReference) {
  const auto s = testing::make_multiview_scene(5, 1, 0, 0.0);
  const auto r = vote(s.query, s.refs);
  EXPECT_EQ(r.chosen_index, 0u);
  EXPECT_EQ(best_view_oracle(s.refs, s.query.world_pose, s.object.model).index, r.chosen_index);
}

TEST(Vote, PicksExactCandidate) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t exact = seed % 4;
    const auto s = testing::make_multiview_scene(100 + seed, 4, exact, 20.0);
    const auto r = vote(s.query, s.refs);
    EXPECT_EQ(r.chosen_index, exact) << "seed " << seed;
    EXPECT_FALSE(r.degenerate);
    EXPECT_EQ(r.per_view_iou.size(), 4u);
    const auto oracle = best_view_oracle(s.refs, s.query.world_pose, s.object.model);
    EXPECT_EQ(oracle.index, exact);
    EXPECT_LE(oracle.add, add_distance(s.object.model, r.world_pose, s.query.world_pose));
  }
}

TEST(Vote, ReorientedObjectScoresLowerOnAverage) {
  double exact_sum = 0, other_sum = 0;
  int others = 0;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const std::size_t exact = seed % 3;
    const auto s = testing::make_multiview_scene(300 + seed, 3, exact, 30.0, ObjectKind::kLShape,
                                                 testing::Perturbation::kAboutObject);
    const auto r = vote(s.query, s.refs);
    for (std::size_t i = 0; i < 3; ++i) {
      if (i == exact) {
        exact_sum += r.iou_scores[i];
      } else {
        other_sum += r.iou_scores[i];
        ++others;
      }
    }
  }
  EXPECT_GT(exact_sum / 12, other_sum / others);
}

TEST(Vote, AllExactScoresAgree) {
  const auto s = testing::make_multiview_scene(6, 5, 0, 0.0);
  ReferenceSet refs = s.refs;
  for (std::size_t i = 0; i < refs.frames.size(); ++i)
    refs.candidate_estimates[i].pose = relative_pose(refs.frames[i], s.query);
  const auto r = vote(s.query, refs);
  const auto [lo, hi] = std::minmax_element(r.iou_scores.begin(), r.iou_scores.end());
  EXPECT_LT(*hi - *lo, 0.01);
}

TEST(Vote, IndependentOfJobs) {
  const auto s = testing::make_multiview_scene(7, 6, 2, 25.0);
  const auto a = vote(s.query, s.refs, 1);
  const auto b = vote(s.query, s.refs, 3);
  EXPECT_EQ(a.iou_scores, b.iou_scores);
  EXPECT_EQ(a.chosen_index, b.chosen_index);
}

TEST(Vote, DegenerateWhenNothingOverlaps) {
  auto s = testing::make_multiview_scene(8, 2, 0, 0.0);
  for (auto &e : s.refs.candidate_estimates) e.pose.translation += Vec3(0, 0, -50);
  const auto r = vote(s.query, s.refs);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.chosen_index, 0u);
}

TEST(Vote, RejectsMismatchedSet) {
  auto s = testing::make_multiview_scene(9, 2, 0, 0.0);
  s.refs.candidate_estimates.pop_back();
  EXPECT_THROW(vote(s.query, s.refs), Error);
}

}  // namespace
}  // namespace roc_pose
