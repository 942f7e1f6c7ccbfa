#pragma once

#include <optional>
#include <string>

#include "roc_pose/geometry.hpp"
#include "roc_pose/image.hpp"

namespace roc_pose {

// One RGB-D observation of a single object.
struct SceneFrame {
  std::optional<RgbImage> rgb;
  DepthImage depth;
  MaskImage mask;
  CameraIntrinsics intrinsics;
  Pose world_pose;  // camera-from-world
  std::string object_id;
  int frame_index = 0;  // position in the bundle it was loaded from

  void validate() const {
    intrinsics.validate();
    if (depth.width() != intrinsics.width ||
        depth.height() != intrinsics.height)
      throw Error(ErrorKind::kDimensionMismatch,
                  "frame depth does not match intrinsics");
    require_same_size(depth, mask, "frame depth/mask");
    if (rgb) require_same_size(depth, *rgb, "frame depth/rgb");
  }
};

// Relative pose mapping query-camera coordinates into reference-camera
// coordinates.
inline Pose relative_pose(const SceneFrame &reference, const SceneFrame &query) {
  return compose(reference.world_pose, invert(query.world_pose));
}

inline Backprojection backproject(const SceneFrame &frame) {
  return backproject(frame.depth, frame.mask, frame.intrinsics);
}

}  // namespace roc_pose
