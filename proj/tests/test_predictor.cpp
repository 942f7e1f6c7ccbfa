#include <gtest/gtest.h>

#include "test_support.hpp"

namespace roc_pose {
namespace {

struct PredictorFixture : ::testing::Test {
  SyntheticObject obj = make_object(ObjectKind::kBlob, 0.15, 256, 3);
  CameraIntrinsics k = default_intrinsics();
  SceneFrame ref = render_frame(obj, look_at(Vec3(0.1, -0.2, -0.5), Vec3::Zero()), k);
  SceneFrame qry = render_frame(obj, look_at(Vec3(0.3, -0.1, -0.45), Vec3::Zero()), k);
  ReferenceRoc roc = build_reference_roc(ref);
  Pose rel = relative_pose(ref, qry);
};

TEST_F(PredictorFixture, ZeroCorruptionIsGroundTruth) {
  EXPECT_EQ(oracle_predict(qry, rel, roc.transform, {}), build_query_roc(qry, rel, roc.transform));
}

TEST_F(PredictorFixture, FullDropoutInvalidatesEverything) {
  CorruptionConfig cfg;
  cfg.pixel_dropout = 1.0;
  EXPECT_EQ(oracle_predict(qry, rel, roc.transform, cfg).valid_count(), 0u);
}

TEST_F(PredictorFixture, DeterministicInSeed) {
  CorruptionConfig cfg;
  cfg.coord_noise_sigma = 0.01;
  cfg.pixel_dropout = 0.3;
  cfg.seed = 17;
  const auto a = oracle_predict(qry, rel, roc.transform, cfg);
  EXPECT_EQ(a, oracle_predict(qry, rel, roc.transform, cfg));
  cfg.seed = 18;
  EXPECT_FALSE(a == oracle_predict(qry, rel, roc.transform, cfg));
}

TEST_F(PredictorFixture, DropoutRateAndNoiseLevel) {
  CorruptionConfig cfg;
  cfg.pixel_dropout = 0.25;
  cfg.seed = 4;
  const auto gt = build_query_roc(qry, rel, roc.transform);
  const auto dropped = oracle_predict(qry, rel, roc.transform, cfg);
  const double kept = double(dropped.valid_count()) / double(gt.valid_count());
  EXPECT_NEAR(kept, 0.75, 0.05);

  cfg = {};
  cfg.coord_noise_sigma = 0.02;
  const auto noisy = oracle_predict(qry, rel, roc.transform, cfg);
  double sq = 0;
  std::size_t n = 0;
  for (int v = 0; v < gt.height(); ++v)
    for (int u = 0; u < gt.width(); ++u)
      if (gt.valid(u, v)) {
        sq += (noisy.at(u, v) - gt.at(u, v)).squaredNorm();
        n += 3;
      }
  EXPECT_NEAR(std::sqrt(sq / n), 0.02, 0.002);
}

TEST_F(PredictorFixture, OccluderAndQuantization) {
  CorruptionConfig cfg;
  cfg.occluder = PixelRect{0, 0, k.width / 2, k.height};
  cfg.quantize_8bit = true;
  const auto gt = build_query_roc(qry, rel, roc.transform);
  const auto out = oracle_predict(qry, rel, roc.transform, cfg);
  for (int v = 0; v < gt.height(); ++v)
    for (int u = 0; u < gt.width(); ++u) {
      if (u < k.width / 2) {
        EXPECT_FALSE(out.valid(u, v));
      } else if (gt.valid(u, v)) {
        ASSERT_TRUE(out.valid(u, v));
        EXPECT_LE((out.at(u, v) - gt.at(u, v)).cwiseAbs().maxCoeff(), 0.5 / 255 + 1e-12);
      }
    }
}

TEST_F(PredictorFixture, EndToEndIdentity) {
  const auto pred = oracle_predict(qry, rel, roc.transform, {});
  const auto est = umeyama(extract_correspondences_3d(pred, qry, roc.transform));
  EXPECT_LT(testing::rotation_error_rad(est.pose, rel), 1e-9);
}

TEST(CorruptionConfig, Validation) {
  CorruptionConfig cfg;
  cfg.pixel_dropout = 1.5;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.pixel_dropout = 0;
  cfg.coord_noise_sigma = -1;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Attention, ZeroProjectionsAverageValues) {
  Rng rng(51);
  Eigen::MatrixXd fq = Eigen::MatrixXd::Random(3, 4), fa = Eigen::MatrixXd::Random(5, 4);
  AttentionWeights w{Eigen::MatrixXd::Zero(4, 2), Eigen::MatrixXd::Zero(4, 2),
                     Eigen::MatrixXd::Random(4, 3)};
  const auto out = cross_attention(fq, fa, w);
  const Eigen::RowVectorXd mean = (fa * w.w_v).colwise().mean();
  for (int r = 0; r < 3; ++r) EXPECT_LT((out.row(r) - mean).norm(), 1e-12);
}

TEST(Attention, SingleContextTokenReturnsItsValue) {
  Eigen::MatrixXd fq = Eigen::MatrixXd::Random(4, 3), fa = Eigen::MatrixXd::Random(1, 3);
  AttentionWeights w{Eigen::MatrixXd::Random(3, 2), Eigen::MatrixXd::Random(3, 2),
                     Eigen::MatrixXd::Random(3, 5)};
  const auto out = cross_attention(fq, fa, w);
  const Eigen::RowVectorXd value = fa * w.w_v;
  for (int r = 0; r < 4; ++r) EXPECT_LT((out.row(r) - value).norm(), 1e-12);
}

TEST(Attention, RowsSumToOneAndInvariantToScoreShift) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Random(4, 6) * 50.0;
  const auto p = softmax_rows(s);
  for (int r = 0; r < 4; ++r) EXPECT_NEAR(p.row(r).sum(), 1.0, 1e-12);
  EXPECT_LT((softmax_rows(s.array() + 1000.0) - p).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Attention, ShapeErrors) {
  AttentionWeights w{Eigen::MatrixXd::Random(3, 2), Eigen::MatrixXd::Random(3, 3),
                     Eigen::MatrixXd::Random(3, 5)};
  EXPECT_THROW(cross_attention(Eigen::MatrixXd::Random(2, 3), Eigen::MatrixXd::Random(2, 3), w),
               Error);
}

TEST(AttentionGrad, ZeroUpstreamGivesZeroGradients) {
  Eigen::MatrixXd fq = Eigen::MatrixXd::Random(3, 4), fa = Eigen::MatrixXd::Random(5, 4);
  AttentionWeights w{Eigen::MatrixXd::Random(4, 2), Eigen::MatrixXd::Random(4, 2),
                     Eigen::MatrixXd::Random(4, 3)};
  const auto g = attention_grad(fq, fa, w, Eigen::MatrixXd::Zero(3, 3));
  EXPECT_EQ(g.query_tokens.norm() + g.context_tokens.norm() + g.w_q.norm() + g.w_k.norm() +
                g.w_v.norm(),
            0.0);
}

TEST(AttentionGrad, MatchesCentralDifferences) {
  Rng rng(52);
  for (int i = 0; i < 10; ++i)
    EXPECT_LT(testing::attention_gradcheck(rng, 3 + i % 3, 4 + i % 4, 5, 3, 4), 1e-4);
}

}  // namespace
}  // namespace roc_pose
