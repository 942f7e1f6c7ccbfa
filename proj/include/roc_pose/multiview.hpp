#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "roc_pose/error.hpp"
#include "roc_pose/frame.hpp"
#include "roc_pose/geometry.hpp"
#include "roc_pose/metrics.hpp"
#include "roc_pose/parallel.hpp"
#include "roc_pose/solvers.hpp"

// Multi-view pose selection. Each reference view j yields a relative
// estimate (query camera -> reference-j camera); combined with the known
// camera-from-world pose of reference j this gives a camera-from-world
// hypothesis for the query. Each hypothesis lifts the query's masked depth
// to world coordinates, splats it into every reference view and is scored
// by the mean mask IoU over the views.
namespace roc_pose {

struct ReferenceSet {
  std::vector<SceneFrame> frames;                 // world_pose is ground truth
  std::vector<PoseEstimate> candidate_estimates;  // query -> reference i

  void validate() const {
    if (frames.empty() || frames.size() != candidate_estimates.size())
      throw Error(ErrorKind::kInvalidArgument,
                  "reference set needs one estimate per reference (>= 1)");
  }
};

struct VoteResult {
  std::size_t chosen_index = 0;
  Pose world_pose;                 // camera-from-world for the query
  std::vector<double> iou_scores;  // mean IoU over reference views, per candidate
  std::vector<std::vector<double>> per_view_iou;  // [candidate][view]
  bool degenerate = false;         // every score was zero
};

// Query camera-from-world implied by a relative estimate against reference i.
inline Pose candidate_world_pose(const PoseEstimate &relative,
                                 const SceneFrame &reference) {
  return compose(invert(relative.pose), reference.world_pose);
}

inline PointCloud lift_to_world(const SceneFrame &query, const Pose &est_world_pose) {
  return transform(invert(est_world_pose), backproject(query).points);
}

// Nearest-pixel splat, no z-buffer; out-of-view points are ignored.
inline MaskImage reproject_mask(const PointCloud &world, const Pose &ref_pose,
                                const CameraIntrinsics &k) {
  MaskImage mask(k.width, k.height, 0);
  for (const auto &p : project(world, ref_pose, k)) {
    if (!p.in_view) continue;
    const auto px = p.nearest();
    mask(px.u, px.v) = 1;
  }
  return mask;
}

// |a & b| / |a | b|, 0 when the union is empty.
inline double miou(const MaskImage &a, const MaskImage &b) {
  require_same_size(a, b, "miou");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a.data()[i] != 0, y = b.data()[i] != 0;
    inter += x && y;
    uni += x || y;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline VoteResult vote(const SceneFrame &query, const ReferenceSet &refs,
                       unsigned jobs = 1) {
  refs.validate();
  const std::size_t n = refs.frames.size();
  VoteResult r;
  r.iou_scores.assign(n, 0.0);
  r.per_view_iou.assign(n, std::vector<double>(n, 0.0));
  parallel_for(n, jobs, [&](std::size_t i) {
    const Pose world_pose = candidate_world_pose(refs.candidate_estimates[i], refs.frames[i]);
    const PointCloud world = lift_to_world(query, world_pose);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const SceneFrame &ref = refs.frames[j];
      const double iou = miou(reproject_mask(world, ref.world_pose, ref.intrinsics), ref.mask);
      r.per_view_iou[i][j] = iou;
      sum += iou;
    }
    r.iou_scores[i] = sum / static_cast<double>(n);
  });
  for (std::size_t i = 1; i < n; ++i)
    if (r.iou_scores[i] > r.iou_scores[r.chosen_index]) r.chosen_index = i;
  r.degenerate = r.iou_scores[r.chosen_index] == 0.0;
  r.world_pose = candidate_world_pose(refs.candidate_estimates[r.chosen_index],
                                      refs.frames[r.chosen_index]);
  return r;
}

struct BestView {
  std::size_t index = 0;
  PoseEstimate estimate;
  double add = 0.0;
};

// Evaluation-only upper bound: the candidate whose world pose has the lowest
// ADD against the ground-truth query pose. Ties go to the lowest index.
inline BestView best_view_oracle(const ReferenceSet &refs, const Pose &gt_world_pose,
                                 const ObjectModel &model) {
  refs.validate();
  BestView best;
  best.add = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < refs.frames.size(); ++i) {
    const double add = add_distance(
        model, candidate_world_pose(refs.candidate_estimates[i], refs.frames[i]),
        gt_world_pose);
    if (add < best.add) {
      best = {i, refs.candidate_estimates[i], add};
    }
  }
  return best;
}

}  // namespace roc_pose
