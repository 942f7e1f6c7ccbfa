#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <vector>

#include "roc_pose/error.hpp"
#include "roc_pose/image.hpp"

namespace roc_pose {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

using PointCloud = std::vector<Vec3>;

// Rigid transform x -> rotation * x + translation.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }

  static Pose from_matrix(const Mat4 &m) {
    return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
  }

  // Axis need not be normalized; a zero axis yields the identity rotation.
  static Pose from_axis_angle(const Vec3 &axis, double angle_rad,
                              const Vec3 &translation = Vec3::Zero()) {
    const double n = axis.norm();
    if (n == 0.0) return {Mat3::Identity(), translation};
    return {Eigen::AngleAxisd(angle_rad, axis / n).toRotationMatrix(),
            translation};
  }

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  Vec3 operator*(const Vec3 &p) const { return rotation * p + translation; }

  bool is_valid(double tol = 1e-9) const {
    if (!rotation.allFinite() || !translation.allFinite()) return false;
    const Mat3 gram = rotation.transpose() * rotation;
    return (gram - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(rotation.determinant() - 1.0) <= tol;
  }
};

// compose(a, b) applies b first, then a.
inline Pose compose(const Pose &a, const Pose &b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

inline Pose invert(const Pose &p) {
  const Mat3 rt = p.rotation.transpose();
  return {rt, -(rt * p.translation)};
}

inline PointCloud transform(const Pose &pose, const PointCloud &cloud) {
  PointCloud out;
  out.reserve(cloud.size());
  for (const auto &p : cloud) out.push_back(pose * p);
  return out;
}

// Geodesic angle of a rotation matrix in radians. The atan2 form stays
// accurate near 0 and pi where the plain acos-of-trace loses ~8 digits.
inline double rotation_angle(const Mat3 &r) {
  const double cos_part = std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0);
  const Vec3 skew(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double sin_part = 0.5 * skew.norm();
  return std::atan2(sin_part, cos_part);
}

struct CameraIntrinsics {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;

  bool is_valid() const {
    return fx > 0 && fy > 0 && width > 0 && height > 0 && cx >= 0 &&
           cx < width && cy >= 0 && cy < height;
  }

  void validate() const {
    if (!is_valid())
      throw Error(ErrorKind::kInvalidArgument, "invalid camera intrinsics");
  }

  Mat3 matrix() const {
    Mat3 k;
    k << fx, 0, cx, 0, fy, cy, 0, 0, 1;
    return k;
  }

  // Homogeneous 4x4 form.
  Mat4 matrix4() const {
    Mat4 k = Mat4::Identity();
    k.topLeftCorner<3, 3>() = matrix();
    return k;
  }

  Vec3 ray(double u, double v, double depth) const {
    return {(u - cx) * depth / fx, (v - cy) * depth / fy, depth};
  }

  friend bool operator==(const CameraIntrinsics &,
                         const CameraIntrinsics &) = default;
};

struct PixelIndex {
  int u = 0, v = 0;
  friend bool operator==(const PixelIndex &, const PixelIndex &) = default;
};

struct Backprojection {
  PointCloud points;
  std::vector<PixelIndex> pixels;  // index-aligned with points
};

// One point per pixel with mask != 0 and depth > 0, scanned row-major.
// Pixel (u, v) samples the ray through (u, v) exactly; depth is z-depth.
inline Backprojection backproject(const DepthImage &depth,
                                  const MaskImage &mask,
                                  const CameraIntrinsics &k) {
  require_same_size(depth, mask, "backproject depth/mask");
  if (depth.width() != k.width || depth.height() != k.height)
    throw Error(ErrorKind::kDimensionMismatch,
                "backproject: image does not match intrinsics");
  Backprojection out;
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      const double d = depth(u, v);
      if (mask(u, v) == 0 || !(d > 0.0)) continue;
      out.points.push_back(k.ray(u, v, d));
      out.pixels.push_back({u, v});
    }
  }
  return out;
}

struct Projection {
  Vec2 uv = Vec2::Zero();
  double depth = 0.0;
  bool in_view = false;

  PixelIndex nearest() const {
    return {static_cast<int>(std::lround(uv.x())),
            static_cast<int>(std::lround(uv.y()))};
  }
};

// Points with z <= 1e-9 or whose nearest pixel falls outside the image are
// returned with in_view = false rather than dropped.
inline std::vector<Projection> project(const PointCloud &cloud,
                                       const Pose &pose,
                                       const CameraIntrinsics &k) {
  std::vector<Projection> out;
  out.reserve(cloud.size());
  for (const auto &p : cloud) {
    const Vec3 c = pose * p;
    Projection proj;
    proj.depth = c.z();
    if (c.z() > 1e-9) {
      proj.uv = {k.fx * c.x() / c.z() + k.cx, k.fy * c.y() / c.z() + k.cy};
      // Same bounds as nearest() landing in [0, width) x [0, height).
      proj.in_view = proj.uv.x() > -0.5 && proj.uv.x() < k.width - 0.5 &&
                     proj.uv.y() > -0.5 && proj.uv.y() < k.height - 0.5;
    }
    out.push_back(proj);
  }
  return out;
}

inline Vec3 centroid(const PointCloud &cloud) {
  Vec3 c = Vec3::Zero();
  if (cloud.empty()) return c;
  for (const auto &p : cloud) c += p;
  return c / static_cast<double>(cloud.size());
}

}  // namespace roc_pose
