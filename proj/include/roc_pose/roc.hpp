#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <utility>
#include <vector>

#include "roc_pose/error.hpp"
#include "roc_pose/frame.hpp"
#include "roc_pose/geometry.hpp"
#include "roc_pose/image.hpp"
#include "roc_pose/image_io.hpp"

namespace roc_pose {

// Margin applied to the largest axis extent so that the fitting cloud lands
// strictly inside [-0.5, 0.5].
inline constexpr double kRocMargin = 1.1;
inline constexpr double kRocFitBound = 0.5 / kRocMargin;

// Uniform scale plus shift: x -> scale * x + shift. As a 4x4 matrix this is
// [scale*I | shift]. Fitting stores shift = -scale * center so that the
// forward map reads scale * (x - center).
struct ScaleTransform {
  double scale = 1.0;
  Vec3 shift = Vec3::Zero();

  Vec3 apply(const Vec3 &p) const { return scale * p + shift; }

  Vec3 center() const { return -shift / scale; }

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() *= scale;
    m.topRightCorner<3, 1>() = shift;
    return m;
  }
};

inline ScaleTransform invert_scale(const ScaleTransform &s) {
  return {1.0 / s.scale, -s.shift / s.scale};
}

inline PointCloud apply_scale(const ScaleTransform &s, const PointCloud &cloud) {
  PointCloud out;
  out.reserve(cloud.size());
  for (const auto &p : cloud) out.push_back(s.apply(p));
  return out;
}

// w = largest axis-aligned extent, c = bounding-box center,
// scale = 1 / (w * 1.1), points map to (p - c) * scale.
inline ScaleTransform fit_scale(const PointCloud &cloud) {
  if (cloud.size() < 2)
    throw Error(ErrorKind::kDegenerateCloud,
                "need at least 2 points, got " + std::to_string(cloud.size()));
  Vec3 lo = cloud.front(), hi = cloud.front();
  for (const auto &p : cloud) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double w = (hi - lo).maxCoeff();
  if (!(w > 0.0) || !std::isfinite(w))
    throw Error(ErrorKind::kDegenerateCloud, "cloud has zero extent");
  const Vec3 c = (hi + lo) * 0.5;
  const double s = 1.0 / (w * kRocMargin);
  return {s, -s * c};
}

// Per-pixel ROC coordinates with a validity mask. Invalid pixels hold (0,0,0).
class RocMap {
 public:
  RocMap() = default;
  RocMap(int width, int height)
      : coords_(width, height, Vec3::Zero()), valid_(width, height, 0) {}

  int width() const noexcept { return coords_.width(); }
  int height() const noexcept { return coords_.height(); }

  bool valid(int u, int v) const { return valid_(u, v) != 0; }
  const Vec3 &at(int u, int v) const { return coords_(u, v); }

  void set(int u, int v, const Vec3 &c) {
    coords_(u, v) = c;
    valid_(u, v) = 1;
  }
  void invalidate(int u, int v) {
    coords_(u, v) = Vec3::Zero();
    valid_(u, v) = 0;
  }

  const MaskImage &valid_mask() const noexcept { return valid_; }
  const Image<Vec3> &coords() const noexcept { return coords_; }
  std::size_t valid_count() const { return count_nonzero(valid_); }

  // Number of valid coordinates with any |component| > bound.
  std::size_t count_out_of_range(double bound = 0.5) const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < coords_.size(); ++i)
      if (valid_.data()[i] && coords_.data()[i].cwiseAbs().maxCoeff() > bound)
        ++n;
    return n;
  }

  friend bool operator==(const RocMap &a, const RocMap &b) {
    return a.valid_ == b.valid_ && a.coords_.width() == b.coords_.width() &&
           a.coords_.height() == b.coords_.height() &&
           std::equal(a.coords_.data().begin(), a.coords_.data().end(),
                      b.coords_.data().begin());
  }

 private:
  Image<Vec3> coords_;
  MaskImage valid_;
};

struct ReferenceRoc {
  RocMap map;
  ScaleTransform transform;
};

inline RocMap write_roc(const Backprojection &bp, const PointCloud &coords,
                        int width, int height) {
  RocMap map(width, height);
  for (std::size_t i = 0; i < coords.size(); ++i)
    map.set(bp.pixels[i].u, bp.pixels[i].v, coords[i]);
  return map;
}

inline ReferenceRoc build_reference_roc(const SceneFrame &frame) {
  frame.validate();
  const Backprojection bp = backproject(frame);
  const ScaleTransform s = fit_scale(bp.points);
  return {write_roc(bp, apply_scale(s, bp.points), frame.depth.width(),
                    frame.depth.height()),
          s};
}

// Ground-truth ROC of a query view. relative_pose maps query-camera points
// into the reference camera. Values are not clamped; geometry unseen by the
// reference may fall outside [-0.5, 0.5].
inline RocMap build_query_roc(const SceneFrame &query, const Pose &relative_pose,
                              const ScaleTransform &s) {
  query.validate();
  const Backprojection bp = backproject(query);
  PointCloud coords;
  coords.reserve(bp.points.size());
  for (const auto &p : bp.points) coords.push_back(s.apply(relative_pose * p));
  return write_roc(bp, coords, query.depth.width(), query.depth.height());
}

// ---------------------------------------------------------------------------
// Image codec

enum class RocEncoding { kFloat, k8Bit };

// Encoded ROC image. kFloat keeps full double precision in memory (the PFM
// file form narrows to float32); k8Bit stores round((x + 0.5) * 255).
struct RocImage {
  RocEncoding encoding = RocEncoding::kFloat;
  int width = 0;
  int height = 0;
  std::vector<double> float_channels;  // kFloat: 3 per pixel
  std::vector<std::uint8_t> bytes;     // k8Bit: 3 per pixel
  MaskImage valid;
  std::size_t clamped_count = 0;  // channels saturated by the 8-bit encoder
};

inline std::uint8_t encode_roc_channel(double x, bool *clamped = nullptr) {
  const double scaled = std::round((x + 0.5) * 255.0);
  const double c = std::clamp(scaled, 0.0, 255.0);
  if (clamped) *clamped = c != scaled;
  return static_cast<std::uint8_t>(c);
}

inline double decode_roc_channel(std::uint8_t b) { return b / 255.0 - 0.5; }

inline RocImage encode_roc_image(const RocMap &m, RocEncoding mode) {
  RocImage img;
  img.encoding = mode;
  img.width = m.width();
  img.height = m.height();
  img.valid = m.valid_mask();
  const std::size_t n = static_cast<std::size_t>(m.width()) * m.height();
  if (mode == RocEncoding::kFloat) {
    img.float_channels.assign(3 * n, 0.0);
  } else {
    img.bytes.assign(3 * n, 0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!m.valid_mask().data()[i]) continue;
    const Vec3 &c = m.coords().data()[i];
    for (int ch = 0; ch < 3; ++ch) {
      if (mode == RocEncoding::kFloat) {
        img.float_channels[3 * i + ch] = c[ch];
      } else {
        bool clamped = false;
        img.bytes[3 * i + ch] = encode_roc_channel(c[ch], &clamped);
        img.clamped_count += clamped;
      }
    }
  }
  return img;
}

inline RocMap decode_roc_image(const RocImage &img) {
  RocMap m(img.width, img.height);
  require_same_size(m.valid_mask(), img.valid, "decode_roc_image");
  for (int v = 0; v < img.height; ++v) {
    for (int u = 0; u < img.width; ++u) {
      if (!img.valid(u, v)) continue;
      const std::size_t i = 3 * (static_cast<std::size_t>(v) * img.width + u);
      Vec3 c;
      for (int ch = 0; ch < 3; ++ch)
        c[ch] = img.encoding == RocEncoding::kFloat
                    ? img.float_channels[i + ch]
                    : decode_roc_channel(img.bytes[i + ch]);
      m.set(u, v, c);
    }
  }
  return m;
}

// Files: <stem>.pfm or <stem>.ppm for the coordinates, <stem>_valid.pgm for
// the validity mask.
inline void save_roc_map(const std::filesystem::path &stem, const RocMap &m,
                         RocEncoding mode) {
  const RocImage img = encode_roc_image(m, mode);
  auto path = stem;
  if (mode == RocEncoding::kFloat) {
    io::FloatImage f{img.width, img.height, 3, {}};
    f.values.reserve(img.float_channels.size());
    for (double x : img.float_channels) f.values.push_back(static_cast<float>(x));
    io::write_pfm(path.replace_extension(".pfm"), f);
  } else {
    RgbImage rgb(img.width, img.height);
    for (std::size_t i = 0; i < rgb.size(); ++i)
      rgb.data()[i] = {img.bytes[3 * i], img.bytes[3 * i + 1], img.bytes[3 * i + 2]};
    io::write_ppm(path.replace_extension(".ppm"), rgb);
  }
  io::write_pgm(stem.string() + "_valid.pgm", img.valid);
}

inline RocMap load_roc_map(const std::filesystem::path &stem, RocEncoding mode) {
  RocImage img;
  img.encoding = mode;
  img.valid = io::read_pgm_mask(stem.string() + "_valid.pgm");
  auto path = stem;
  if (mode == RocEncoding::kFloat) {
    const io::FloatImage f = io::read_pfm(path.replace_extension(".pfm"));
    if (f.channels != 3)
      throw Error(ErrorKind::kFormat, path.string() + ": expected 3 channels");
    img.width = f.width;
    img.height = f.height;
    img.float_channels.assign(f.values.begin(), f.values.end());
  } else {
    const RgbImage rgb = io::read_ppm(path.replace_extension(".ppm"));
    img.width = rgb.width();
    img.height = rgb.height();
    for (const auto &p : rgb.data()) {
      img.bytes.push_back(p.r);
      img.bytes.push_back(p.g);
      img.bytes.push_back(p.b);
    }
  }
  return decode_roc_image(img);
}

// ---------------------------------------------------------------------------
// Loss

inline double smooth_l1(double residual, double beta) {
  const double a = std::abs(residual);
  return a < beta ? 0.5 * a * a / beta : a - 0.5 * beta;
}

// Channel losses are summed per pixel, then averaged over mask pixels.
inline double smooth_l1_roc_loss(const RocMap &pred, const RocMap &gt,
                                 const MaskImage &mask, double beta = 0.1) {
  require_same_size(pred.valid_mask(), gt.valid_mask(), "roc loss pred/gt");
  require_same_size(pred.valid_mask(), mask, "roc loss mask");
  if (!(beta > 0.0))
    throw Error(ErrorKind::kInvalidArgument, "beta must be positive");
  double total = 0.0;
  std::size_t n = 0;
  for (int v = 0; v < mask.height(); ++v) {
    for (int u = 0; u < mask.width(); ++u) {
      if (!mask(u, v)) continue;
      ++n;
      const Vec3 c = gt.at(u, v) - pred.at(u, v);
      for (int ch = 0; ch < 3; ++ch) total += smooth_l1(c[ch], beta);
    }
  }
  if (n == 0)
    throw Error(ErrorKind::kInvalidArgument, "roc loss: empty mask");
  return total / static_cast<double>(n);
}

}  // namespace roc_pose
