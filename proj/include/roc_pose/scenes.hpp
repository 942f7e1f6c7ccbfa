#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "roc_pose/error.hpp"
#include "roc_pose/frame.hpp"
#include "roc_pose/geometry.hpp"
#include "roc_pose/image_io.hpp"
#include "roc_pose/metrics.hpp"
#include "roc_pose/predictor.hpp"
#include "roc_pose/random.hpp"

namespace roc_pose {

enum class ObjectKind { kBox, kCylinder, kLShape, kBlob };

inline std::string to_string(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::kBox: return "box";
    case ObjectKind::kCylinder: return "cylinder";
    case ObjectKind::kLShape: return "lshape";
    case ObjectKind::kBlob: return "blob";
  }
  return "unknown";
}

inline ObjectKind parse_object_kind(const std::string &s) {
  if (s == "box") return ObjectKind::kBox;
  if (s == "cylinder") return ObjectKind::kCylinder;
  if (s == "lshape") return ObjectKind::kLShape;
  if (s == "blob") return ObjectKind::kBlob;
  throw Error(ErrorKind::kInvalidArgument, "unknown object kind '" + s + "'");
}

struct ObjectSpec {
  ObjectKind kind = ObjectKind::kBox;
  // Bounding dimensions in meters. Cylinder: diameter x diameter x height.
  Vec3 dims{0.15, 0.11, 0.075};
  int samples = 1024;           // model vertices used by the metrics
  int surface_samples = 60000;  // dense cloud used by the renderer
  int cylinder_symmetry_steps = 36;
  std::uint64_t seed = 0;
};

// A procedurally generated object centered at the origin of its own frame.
struct SyntheticObject {
  ObjectKind kind = ObjectKind::kBox;
  ObjectModel model;
  PointCloud surface;
  PointCloud normals;  // index-aligned with surface, for shading only
};

namespace detail {

struct SurfaceSample {
  PointCloud points;
  PointCloud normals;
  void add(const Vec3 &p, const Vec3 &n) {
    points.push_back(p);
    normals.push_back(n);
  }
};

// Area-weighted samples over the six faces of an axis-aligned box.
inline void sample_box(SurfaceSample &out, const Vec3 &lo, const Vec3 &hi,
                       int count, Rng &rng) {
  const Vec3 e = hi - lo;
  const std::array<double, 3> area{e.y() * e.z(), e.x() * e.z(), e.x() * e.y()};
  const double total = 2 * (area[0] + area[1] + area[2]);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < count; ++i) {
    double pick = unit(rng) * total;
    int axis = 0;
    while (axis < 2 && pick >= 2 * area[axis]) pick -= 2 * area[axis++];
    const bool upper = pick >= area[axis];
    Vec3 p(lo.x() + unit(rng) * e.x(), lo.y() + unit(rng) * e.y(),
           lo.z() + unit(rng) * e.z());
    p[axis] = upper ? hi[axis] : lo[axis];
    Vec3 n = Vec3::Zero();
    n[axis] = upper ? 1.0 : -1.0;
    out.add(p, n);
  }
}

inline bool strictly_inside(const Vec3 &p, const Vec3 &lo, const Vec3 &hi) {
  return (p.array() > lo.array()).all() && (p.array() < hi.array()).all();
}

// Greedy farthest-point sampling starting from index 0.
inline PointCloud farthest_point_sample(const PointCloud &pts, std::size_t k) {
  if (pts.size() <= k) return pts;
  PointCloud out;
  out.reserve(k);
  std::vector<double> dist(pts.size(), std::numeric_limits<double>::infinity());
  std::size_t current = 0;
  for (std::size_t n = 0; n < k; ++n) {
    out.push_back(pts[current]);
    std::size_t next = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      dist[i] = std::min(dist[i], (pts[i] - pts[current]).squaredNorm());
      if (dist[i] > best) {
        best = dist[i];
        next = i;
      }
    }
    current = next;
  }
  return out;
}

}  // namespace detail

inline SyntheticObject make_object(const ObjectSpec &spec) {
  if (spec.samples < 64)
    throw Error(ErrorKind::kInvalidArgument, "need at least 64 model samples");
  if (!(spec.dims.array() > 0.0).all() || !spec.dims.allFinite())
    throw Error(ErrorKind::kInvalidArgument, "object dimensions must be positive");
  if (spec.surface_samples < spec.samples)
    throw Error(ErrorKind::kInvalidArgument, "surface_samples < samples");

  Rng rng(derive_seed(spec.seed, 100));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  detail::SurfaceSample s;
  const Vec3 half = spec.dims / 2;
  std::vector<Pose> symmetries;
  const double pi = std::numbers::pi;

  switch (spec.kind) {
    case ObjectKind::kBox: {
      // Corners first so farthest-point sampling keeps the exact extremes.
      for (int c = 0; c < 8; ++c) {
        const Vec3 p((c & 1 ? 1 : -1) * half.x(), (c & 2 ? 1 : -1) * half.y(),
                     (c & 4 ? 1 : -1) * half.z());
        s.add(p, p.normalized());
      }
      detail::sample_box(s, -half, half, spec.surface_samples - 8, rng);
      const bool square = half.x() == half.y();
      const int z_steps = square ? 4 : 2;
      for (int flip = 0; flip < 2; ++flip)
        for (int r = 0; r < z_steps; ++r) {
          const Pose rz = Pose::from_axis_angle(Vec3::UnitZ(), 2 * pi * r / z_steps);
          symmetries.push_back(
              flip ? compose(rz, Pose::from_axis_angle(Vec3::UnitX(), pi)) : rz);
        }
      break;
    }
    case ObjectKind::kCylinder: {
      const double radius = 0.5 * std::min(spec.dims.x(), spec.dims.y());
      const double h = spec.dims.z();
      const double side = 2 * pi * radius * h, cap = pi * radius * radius;
      for (int i = 0; i < spec.surface_samples; ++i) {
        const double pick = unit(rng) * (side + 2 * cap);
        const double phi = 2 * pi * unit(rng);
        if (pick < side) {
          const Vec3 n(std::cos(phi), std::sin(phi), 0.0);
          s.add(Vec3(radius * n.x(), radius * n.y(), (unit(rng) - 0.5) * h), n);
        } else {
          const double r = radius * std::sqrt(unit(rng));
          const double z = pick < side + cap ? h / 2 : -h / 2;
          s.add(Vec3(r * std::cos(phi), r * std::sin(phi), z),
                Vec3(0, 0, z > 0 ? 1.0 : -1.0));
        }
      }
      const int steps = std::max(1, spec.cylinder_symmetry_steps);
      for (int r = 0; r < steps; ++r)
        symmetries.push_back(Pose::from_axis_angle(Vec3::UnitZ(), 2 * pi * r / steps));
      break;
    }
    case ObjectKind::kLShape: {
      // Two overlapping boxes forming an L in the xy-plane.
      const Vec3 lo_a = -half;
      const Vec3 hi_a(-half.x() + 0.4 * spec.dims.x(), half.y(), half.z());
      const Vec3 lo_b = -half;
      const Vec3 hi_b(half.x(), -half.y() + 0.4 * spec.dims.y(), half.z());
      detail::SurfaceSample raw;
      detail::sample_box(raw, lo_a, hi_a, spec.surface_samples, rng);
      detail::sample_box(raw, lo_b, hi_b, spec.surface_samples, rng);
      for (std::size_t i = 0; i < raw.points.size(); ++i) {
        const Vec3 &p = raw.points[i];
        if (detail::strictly_inside(p, lo_a, hi_a) ||
            detail::strictly_inside(p, lo_b, hi_b))
          continue;
        // Drop faces that lie inside the other box.
        const bool in_a = (p.array() >= lo_a.array()).all() && (p.array() <= hi_a.array()).all();
        const bool in_b = (p.array() >= lo_b.array()).all() && (p.array() <= hi_b.array()).all();
        if (in_a && in_b) {
          const Vec3 probe = p + 1e-6 * raw.normals[i];
          if (detail::strictly_inside(probe, lo_a, hi_a) ||
              detail::strictly_inside(probe, lo_b, hi_b))
            continue;
        }
        s.add(p, raw.normals[i]);
        if (static_cast<int>(s.points.size()) >= spec.surface_samples) break;
      }
      break;
    }
    case ObjectKind::kBlob: {
      Rng shape_rng(derive_seed(spec.seed, 101));
      std::array<double, 6> coef;
      for (auto &c : coef) c = uniform(shape_rng, -1.0, 1.0);
      auto radius = [&](const Vec3 &d) {
        return 1.0 + 0.18 * std::sin(3 * d.x() + coef[0]) +
               0.12 * std::sin(2 * d.y() + coef[1]) * std::cos(3 * d.z() + coef[2]) +
               0.08 * std::cos(4 * d.z() + coef[3]) * std::sin(2 * d.x() + coef[4]);
      };
      for (int i = 0; i < spec.surface_samples; ++i) {
        const Vec3 d = random_unit_vector(rng);
        s.add(radius(d) * d.cwiseProduct(half), d);
      }
      break;
    }
  }

  // Recenter on the bounding box (L-shape and blob are not symmetric).
  Vec3 lo = s.points.front(), hi = s.points.front();
  for (const auto &p : s.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 center = (lo + hi) / 2;
  if (spec.kind == ObjectKind::kLShape || spec.kind == ObjectKind::kBlob)
    for (auto &p : s.points) p -= center;

  SyntheticObject obj;
  obj.kind = spec.kind;
  obj.model = ObjectModel::create(
      detail::farthest_point_sample(s.points, static_cast<std::size_t>(spec.samples)),
      symmetries);
  obj.surface = std::move(s.points);
  obj.normals = std::move(s.normals);
  return obj;
}

inline SyntheticObject make_object(ObjectKind kind, double size_m, int samples,
                                   std::uint64_t seed) {
  ObjectSpec spec;
  spec.kind = kind;
  spec.samples = samples;
  spec.seed = seed;
  switch (kind) {
    case ObjectKind::kBox: spec.dims = size_m * Vec3(1.0, 0.75, 0.5); break;
    case ObjectKind::kCylinder: spec.dims = size_m * Vec3(0.6, 0.6, 1.0); break;
    case ObjectKind::kLShape: spec.dims = size_m * Vec3(1.0, 0.8, 0.4); break;
    case ObjectKind::kBlob: spec.dims = size_m * Vec3(1.0, 0.8, 0.6); break;
  }
  return make_object(spec);
}

// ---------------------------------------------------------------------------
// Rendering

inline CameraIntrinsics default_intrinsics() {
  return {240.0, 240.0, 95.5, 95.5, 192, 192};
}

inline constexpr int kSplatRadius = 1;

// Camera-from-world pose of a camera at `eye` looking at `target`, rolled by
// `roll` radians about the viewing axis. Camera z points forward, y down.
inline Pose look_at(const Vec3 &eye, const Vec3 &target, double roll = 0.0) {
  const Vec3 z = (target - eye).normalized();
  Vec3 helper = std::abs(z.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  Vec3 x = helper.cross(z).normalized();
  Vec3 y = z.cross(x);
  Mat3 world_from_cam;
  world_from_cam.col(0) = x;
  world_from_cam.col(1) = y;
  world_from_cam.col(2) = z;
  world_from_cam = world_from_cam * Eigen::AngleAxisd(roll, Vec3::UnitZ()).toRotationMatrix();
  return invert({world_from_cam, eye});
}

inline void add_depth_noise(SceneFrame &frame, double sigma, std::uint64_t seed) {
  if (!(sigma > 0.0)) return;
  Rng rng(derive_seed(seed, 7));
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto &d : frame.depth.data()) {
    if (d > 0.0f) d = static_cast<float>(std::max(1e-4, d + noise(rng)));
  }
}

// Point-splat z-buffer render of the object placed at the world origin.
// Each surface point covers the (2r+1)^2 pixels around its projection.
inline SceneFrame render_frame(const SyntheticObject &object, const Pose &camera_pose,
                               const CameraIntrinsics &k, double noise_sigma_depth = 0.0,
                               std::uint64_t seed = 0) {
  k.validate();
  SceneFrame frame;
  frame.intrinsics = k;
  frame.world_pose = camera_pose;
  frame.depth = DepthImage(k.width, k.height, 0.0f);
  frame.mask = MaskImage(k.width, k.height, 0);
  RgbImage rgb(k.width, k.height, Rgb{});
  Image<double> zbuf(k.width, k.height, std::numeric_limits<double>::infinity());

  const auto proj = project(object.surface, camera_pose, k);
  std::size_t in_front = 0;
  const Vec3 light = Vec3(0.3, -0.5, -1.0).normalized();
  for (std::size_t i = 0; i < proj.size(); ++i) {
    if (!(proj[i].depth > 1e-9)) continue;
    ++in_front;
    const int cu = static_cast<int>(std::lround(std::clamp(proj[i].uv.x(), -1e6, 1e6)));
    const int cv = static_cast<int>(std::lround(std::clamp(proj[i].uv.y(), -1e6, 1e6)));
    const Vec3 n = camera_pose.rotation * object.normals[i];
    const double shade = 0.25 + 0.75 * std::max(0.0, n.dot(light));
    for (int dv = -kSplatRadius; dv <= kSplatRadius; ++dv)
      for (int du = -kSplatRadius; du <= kSplatRadius; ++du) {
        const int u = cu + du, v = cv + dv;
        if (!zbuf.contains(u, v) || proj[i].depth >= zbuf(u, v)) continue;
        zbuf(u, v) = proj[i].depth;
        const auto c = static_cast<std::uint8_t>(std::clamp(255.0 * shade, 0.0, 255.0));
        rgb(u, v) = {c, static_cast<std::uint8_t>(c * 0.8), static_cast<std::uint8_t>(c * 0.5)};
      }
  }
  if (in_front == 0)
    throw Error(ErrorKind::kInvalidArgument, "object is entirely behind the camera");
  std::size_t covered = 0;
  for (int v = 0; v < k.height; ++v)
    for (int u = 0; u < k.width; ++u)
      if (std::isfinite(zbuf(u, v))) {
        frame.depth(u, v) = static_cast<float>(zbuf(u, v));
        frame.mask(u, v) = 1;
        ++covered;
      }
  if (covered == 0)
    throw Error(ErrorKind::kInvalidArgument, "object does not project into the image");
  frame.rgb = std::move(rgb);
  add_depth_noise(frame, noise_sigma_depth, seed);
  return frame;
}

// Removes a full-height (or full-width) strip of the mask bounding box, swept
// from a random side until `fraction` of the mask area is gone.
inline std::optional<PixelRect> carve_occlusion(SceneFrame &frame, double fraction,
                                                std::uint64_t seed) {
  if (!(fraction > 0.0)) return std::nullopt;
  if (fraction >= 1.0)
    throw Error(ErrorKind::kInvalidArgument, "occlusion must be < 1");
  const MaskImage &m = frame.mask;
  int u0 = m.width(), v0 = m.height(), u1 = -1, v1 = -1;
  std::size_t area = 0;
  for (int v = 0; v < m.height(); ++v)
    for (int u = 0; u < m.width(); ++u)
      if (m(u, v)) {
        u0 = std::min(u0, u), u1 = std::max(u1, u);
        v0 = std::min(v0, v), v1 = std::max(v1, v);
        ++area;
      }
  if (area == 0) return std::nullopt;
  Rng rng(derive_seed(seed, 11));
  const int side = std::uniform_int_distribution<int>(0, 3)(rng);
  const double target = fraction * static_cast<double>(area);
  const bool columns = side < 2;
  const bool forward = side % 2 == 0;
  const int lo = columns ? u0 : v0, hi = columns ? u1 : v1;
  std::size_t removed = 0;
  int line = forward ? lo : hi;
  for (; forward ? line <= hi : line >= lo; line += forward ? 1 : -1) {
    // Stop at the line whose removal is closest to the target.
    std::size_t in_line = 0;
    if (columns) {
      for (int v = v0; v <= v1; ++v) in_line += m(line, v) != 0;
    } else {
      for (int u = u0; u <= u1; ++u) in_line += m(u, line) != 0;
    }
    if (removed >= target ||
        std::abs(double(removed + in_line) - target) > std::abs(double(removed) - target))
      break;
    removed += in_line;
  }
  const int first = forward ? lo : line + 1;
  const int last = forward ? line - 1 : hi;
  if (last < first) return std::nullopt;
  PixelRect rect = columns ? PixelRect{first, v0, last - first + 1, v1 - v0 + 1}
                           : PixelRect{u0, first, u1 - u0 + 1, last - first + 1};
  float occluder_depth = std::numeric_limits<float>::infinity();
  for (auto d : frame.depth.data())
    if (d > 0.0f) occluder_depth = std::min(occluder_depth, d);
  occluder_depth *= 0.8f;
  for (int v = rect.y; v < rect.y + rect.height; ++v)
    for (int u = rect.x; u < rect.x + rect.width; ++u) {
      frame.mask(u, v) = 0;
      frame.depth(u, v) = occluder_depth;
    }
  return rect;
}

struct Range {
  double lo = 0.0, hi = 0.0;
  double sample(Rng &rng) const { return lo == hi ? lo : uniform(rng, lo, hi); }
  bool is_valid() const { return std::isfinite(lo) && std::isfinite(hi) && lo <= hi; }
};

struct PairSpec {
  Range rotation_gap_deg{0.0, 0.0};
  Range translation_gap_m{0.0, 0.0};
  double occlusion = 0.0;  // fraction of the query mask carved away
  Range camera_distance_m{0.45, 0.6};
  double depth_noise_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!rotation_gap_deg.is_valid() || rotation_gap_deg.lo < 0 ||
        rotation_gap_deg.hi > 180 || !translation_gap_m.is_valid() ||
        translation_gap_m.lo < 0 || !camera_distance_m.is_valid() ||
        camera_distance_m.lo <= 0 || !(occlusion >= 0.0 && occlusion < 1.0) ||
        !(depth_noise_sigma >= 0.0))
      throw Error(ErrorKind::kInvalidArgument, "invalid pair spec");
  }
};

struct ScenePair {
  SceneFrame reference;
  SceneFrame query;
  Pose gt_relative;  // query camera -> reference camera
  std::optional<PixelRect> occluder;
};

// Reference camera on a sphere around the object; the query camera is the
// reference camera rotated about the object center by the sampled gap, then
// displaced by the sampled translation gap.
inline ScenePair make_pair(const SyntheticObject &object, const PairSpec &spec,
                           const CameraIntrinsics &k = default_intrinsics()) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, 200));
  const Vec3 dir = random_unit_vector(rng);
  const double dist = spec.camera_distance_m.sample(rng);
  const double roll = uniform(rng, -std::numbers::pi, std::numbers::pi);
  const Pose ref_pose = look_at(dir * dist, Vec3::Zero(), roll);

  const double gap = spec.rotation_gap_deg.sample(rng) * std::numbers::pi / 180.0;
  const Vec3 axis = random_unit_vector(rng);
  const double shift = spec.translation_gap_m.sample(rng);
  const Vec3 shift_dir = random_unit_vector(rng);
  Pose world_from_query =
      compose(Pose::from_axis_angle(axis, gap), invert(ref_pose));
  if (shift > 0.0) world_from_query.translation += shift * shift_dir;
  const Pose query_pose = invert(world_from_query);

  ScenePair pair;
  pair.reference = render_frame(object, ref_pose, k, spec.depth_noise_sigma,
                                derive_seed(spec.seed, 201));
  pair.query = render_frame(object, query_pose, k, spec.depth_noise_sigma,
                            derive_seed(spec.seed, 202));
  pair.query.frame_index = 1;
  pair.occluder = carve_occlusion(pair.query, spec.occlusion, derive_seed(spec.seed, 203));
  pair.gt_relative = relative_pose(pair.reference, pair.query);
  return pair;
}

// ---------------------------------------------------------------------------
// Bundles

struct SceneBundle {
  CameraIntrinsics intrinsics;
  std::vector<SceneFrame> frames;
  ObjectModel model;
  std::string object_id;
  nlohmann::json generator = nlohmann::json::object();
};

struct OrbitSpec {
  ObjectKind kind = ObjectKind::kBox;
  double size_m = 0.15;
  int samples = 1024;
  int frames = 2;
  double gap_deg = 0.0;        // rotation of the last frame relative to frame 0
  double translation_gap_m = 0.0;
  double occlusion = 0.0;      // applied to frames 1..N-1
  double depth_noise = 0.0;
  bool rgb = true;
  std::uint64_t seed = 0;
};

inline nlohmann::json to_json(const OrbitSpec &s) {
  return {{"kind", to_string(s.kind)}, {"size_m", s.size_m},
          {"samples", s.samples},      {"frames", s.frames},
          {"gap_deg", s.gap_deg},      {"translation_gap_m", s.translation_gap_m},
          {"occlusion", s.occlusion},  {"depth_noise", s.depth_noise},
          {"rgb", s.rgb},              {"seed", s.seed}};
}

// Frame i sits at fraction i / (N - 1) along an arc of gap_deg about an axis
// perpendicular to the first viewing direction.
inline SceneBundle generate_orbit_bundle(const OrbitSpec &spec,
                                         const CameraIntrinsics &k = default_intrinsics()) {
  if (spec.frames < 1)
    throw Error(ErrorKind::kInvalidArgument, "--frames must be >= 1");
  if (!(spec.occlusion >= 0.0 && spec.occlusion < 1.0))
    throw Error(ErrorKind::kInvalidArgument, "--occlusion must be in [0, 1)");
  if (!(spec.depth_noise >= 0.0) || !(spec.translation_gap_m >= 0.0))
    throw Error(ErrorKind::kInvalidArgument, "noise and gaps must be >= 0");
  const SyntheticObject object =
      make_object(spec.kind, spec.size_m, spec.samples, spec.seed);
  Rng rng(derive_seed(spec.seed, 300));
  const Vec3 dir = random_unit_vector(rng);
  const double dist = uniform(rng, 0.45, 0.6);
  const double roll = uniform(rng, -std::numbers::pi, std::numbers::pi);
  Vec3 axis = random_unit_vector(rng);
  axis = (axis - axis.dot(dir) * dir).normalized();
  const Vec3 shift_dir = random_unit_vector(rng);
  const Pose ref_pose = look_at(dir * dist, Vec3::Zero(), roll);

  SceneBundle b;
  b.intrinsics = k;
  b.model = object.model;
  b.object_id = to_string(spec.kind) + "_" + std::to_string(spec.seed);
  b.generator = to_json(spec);
  b.frames.resize(static_cast<std::size_t>(spec.frames));
  for (int i = 0; i < spec.frames; ++i) {
    const double t = spec.frames > 1 ? double(i) / (spec.frames - 1) : 0.0;
    Pose world_from_cam = compose(
        Pose::from_axis_angle(axis, t * spec.gap_deg * std::numbers::pi / 180.0),
        invert(ref_pose));
    if (t > 0.0 && spec.translation_gap_m > 0.0)
      world_from_cam.translation += t * spec.translation_gap_m * shift_dir;
    SceneFrame f = render_frame(object, invert(world_from_cam), k, spec.depth_noise,
                                derive_seed(spec.seed, 1000 + i));
    if (i > 0) carve_occlusion(f, spec.occlusion, derive_seed(spec.seed, 2000 + i));
    if (!spec.rgb) f.rgb.reset();
    f.object_id = b.object_id;
    f.frame_index = i;
    b.frames[i] = std::move(f);
  }
  return b;
}

namespace detail {

inline std::string frame_file(const char *prefix, int i, const char *ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04d.%s", prefix, i, ext);
  return buf;
}

inline std::string format_double(double x) {
  if (x == 0.0) x = 0.0;  // drop the sign of -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// 4x4 row-major, 17 significant digits.
inline std::string matrix_json(const Mat4 &m) {
  std::string s = "[";
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      s += format_double(m(r, c));
      if (r != 3 || c != 3) s += ", ";
    }
  return s + "]";
}

inline Mat4 matrix_from_json(const nlohmann::json &j, const std::string &where) {
  if (!j.is_array() || j.size() != 16)
    throw Error(ErrorKind::kFormat, where + ": expected 16 numbers");
  Mat4 m;
  for (int i = 0; i < 16; ++i) {
    if (!j[i].is_number())
      throw Error(ErrorKind::kFormat, where + ": non-numeric matrix entry");
    m(i / 4, i % 4) = j[i].get<double>();
  }
  return m;
}

inline nlohmann::json read_json(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "missing file " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::kFormat, path.string() + ": " + e.what());
  }
}

inline void write_text(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << text;
}

}  // namespace detail

inline void save_bundle(const SceneBundle &b, const std::filesystem::path &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string());
  const bool has_rgb =
      !b.frames.empty() && std::all_of(b.frames.begin(), b.frames.end(),
                                       [](const SceneFrame &f) { return f.rgb.has_value(); });
  nlohmann::json manifest = {{"format", "roc_pose.bundle"},
                             {"version", 1},
                             {"object_id", b.object_id},
                             {"frame_count", b.frames.size()},
                             {"has_rgb", has_rgb},
                             {"generator", b.generator}};
  detail::write_text(dir / "bundle.json", manifest.dump(2) + "\n");
  nlohmann::json k = {{"fx", b.intrinsics.fx},       {"fy", b.intrinsics.fy},
                      {"cx", b.intrinsics.cx},       {"cy", b.intrinsics.cy},
                      {"width", b.intrinsics.width}, {"height", b.intrinsics.height}};
  detail::write_text(dir / "intrinsics.json", k.dump(2) + "\n");

  std::ostringstream model;
  model << "{\n  \"diameter\": " << detail::format_double(b.model.diameter)
        << ",\n  \"symmetries\": [";
  for (std::size_t i = 0; i < b.model.symmetries.size(); ++i)
    model << (i ? ",\n    " : "\n    ") << detail::matrix_json(b.model.symmetries[i].matrix());
  model << "\n  ],\n  \"vertices\": [";
  for (std::size_t i = 0; i < b.model.vertices.size(); ++i) {
    const Vec3 &v = b.model.vertices[i];
    model << (i ? ",\n    [" : "\n    [") << detail::format_double(v.x()) << ", "
          << detail::format_double(v.y()) << ", " << detail::format_double(v.z()) << "]";
  }
  model << "\n  ]\n}\n";
  detail::write_text(dir / "model_points.json", model.str());

  for (std::size_t i = 0; i < b.frames.size(); ++i) {
    const SceneFrame &f = b.frames[i];
    const int n = static_cast<int>(i);
    io::write_pfm(dir / detail::frame_file("depth", n, "pfm"), f.depth);
    io::write_pgm(dir / detail::frame_file("mask", n, "pgm"), f.mask);
    if (has_rgb) io::write_ppm(dir / detail::frame_file("rgb", n, "ppm"), *f.rgb);
    detail::write_text(dir / detail::frame_file("pose", n, "json"),
                       "{\n  \"camera_from_world\": " +
                           detail::matrix_json(f.world_pose.matrix()) + "\n}\n");
  }
}

inline SceneBundle load_bundle(const std::filesystem::path &dir) {
  if (!std::filesystem::is_directory(dir))
    throw Error(ErrorKind::kIo, "bundle directory not found: " + dir.string());
  SceneBundle b;
  const auto manifest = detail::read_json(dir / "bundle.json");
  std::size_t count = 0;
  try {
    b.object_id = manifest.at("object_id").get<std::string>();
    count = manifest.at("frame_count").get<std::size_t>();
    if (manifest.contains("generator")) b.generator = manifest.at("generator");
    const auto k = detail::read_json(dir / "intrinsics.json");
    b.intrinsics = {k.at("fx").get<double>(),  k.at("fy").get<double>(),
                    k.at("cx").get<double>(),  k.at("cy").get<double>(),
                    k.at("width").get<int>(), k.at("height").get<int>()};
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::kFormat, (dir / "bundle.json").string() +
                                        " or intrinsics.json: " + e.what());
  }
  if (!b.intrinsics.is_valid())
    throw Error(ErrorKind::kFormat, (dir / "intrinsics.json").string() + ": invalid intrinsics");

  const auto model_path = dir / "model_points.json";
  const auto model = detail::read_json(model_path);
  try {
    PointCloud verts;
    for (const auto &v : model.at("vertices"))
      verts.emplace_back(v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>());
    std::vector<Pose> syms;
    for (const auto &s : model.at("symmetries"))
      syms.push_back(Pose::from_matrix(detail::matrix_from_json(s, model_path.string())));
    if (verts.empty()) throw Error(ErrorKind::kFormat, model_path.string() + ": no vertices");
    b.model.vertices = std::move(verts);
    b.model.symmetries = std::move(syms);
    b.model.diameter = model.at("diameter").get<double>();
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::kFormat, model_path.string() + ": " + e.what());
  }

  for (std::size_t i = 0; i < count; ++i) {
    const int n = static_cast<int>(i);
    SceneFrame f;
    f.intrinsics = b.intrinsics;
    f.object_id = b.object_id;
    f.frame_index = n;
    f.depth = io::read_depth_pfm(dir / detail::frame_file("depth", n, "pfm"));
    f.mask = io::read_pgm_mask(dir / detail::frame_file("mask", n, "pgm"));
    const auto rgb_path = dir / detail::frame_file("rgb", n, "ppm");
    if (std::filesystem::exists(rgb_path)) f.rgb = io::read_ppm(rgb_path);
    const auto pose_path = dir / detail::frame_file("pose", n, "json");
    const auto pose = detail::read_json(pose_path);
    if (!pose.contains("camera_from_world"))
      throw Error(ErrorKind::kFormat, pose_path.string() + ": missing camera_from_world");
    f.world_pose = Pose::from_matrix(
        detail::matrix_from_json(pose["camera_from_world"], pose_path.string()));
    try {
      f.validate();
    } catch (const Error &e) {
      throw Error(e.kind(), "frame " + std::to_string(n) + ": " + e.what());
    }
    b.frames.push_back(std::move(f));
  }
  return b;
}

}  // namespace roc_pose
