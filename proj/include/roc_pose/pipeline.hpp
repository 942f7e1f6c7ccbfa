#pragma once

#include <cstdint>

#include "roc_pose/frame.hpp"
#include "roc_pose/roc.hpp"
#include "roc_pose/solvers.hpp"

namespace roc_pose {

struct EstimateOptions {
  SolverMethod solver = SolverMethod::kUmeyama;
  RansacConfig ransac;
  bool allow_scale = false;  // diagnosis only; metric scale is already restored by S^-1
  std::size_t max_pairs = kMaxCorrespondences;
  std::uint64_t seed = 0;
};

// Relative pose (query camera -> reference camera) from a predicted ROC map.
// For ransac_pnp the solver's reference->camera pose is inverted so both
// methods report the same convention.
inline PoseEstimate estimate_relative_pose(const RocMap &pred, const SceneFrame &query,
                                           const ScaleTransform &s,
                                           const EstimateOptions &opt = {}) {
  if (opt.solver == SolverMethod::kUmeyama)
    return umeyama(extract_correspondences_3d(pred, query, s, opt.max_pairs, opt.seed),
                   opt.allow_scale);
  RansacConfig cfg = opt.ransac;
  cfg.seed = opt.seed;
  PoseEstimate est = ransac_pnp(
      extract_correspondences_2d3d(pred, query, s, opt.max_pairs, opt.seed),
      query.intrinsics, cfg);
  est.pose = invert(est.pose);
  return est;
}

// Object pose in the query camera implied by a relative estimate, given the
// reference camera's pose of the object.
inline Pose object_pose_in_query(const Pose &relative, const Pose &reference_object_pose) {
  return compose(invert(relative), reference_object_pose);
}

}  // namespace roc_pose
