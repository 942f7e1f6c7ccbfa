#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "roc_pose/error.hpp"
#include "roc_pose/geometry.hpp"

// Pose-error metrics: ADD / ADD-S, exact AUC, ADD-0.1d, n-degree m-cm
// precision, MSSD / MSPD with discrete symmetry sets, a partial average
// recall over the MSSD and MSPD threshold grids, and per-object std.
//
// All thresholds are strict: an error counts as correct only if it is
// below the threshold.
namespace roc_pose {

inline double max_pairwise_distance(const PointCloud &pts) {
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      best = std::max(best, (pts[i] - pts[j]).squaredNorm());
  return std::sqrt(best);
}

struct ObjectModel {
  PointCloud vertices;
  double diameter = 0.0;
  std::vector<Pose> symmetries{Pose::identity()};

  // Computes the diameter; prepends identity to the symmetry set if absent.
  static ObjectModel create(PointCloud vertices, std::vector<Pose> symmetries = {}) {
    if (vertices.empty())
      throw Error(ErrorKind::kInvalidArgument, "object model has no vertices");
    ObjectModel m;
    m.diameter = max_pairwise_distance(vertices);
    m.vertices = std::move(vertices);
    const bool has_identity = std::any_of(
        symmetries.begin(), symmetries.end(), [](const Pose &p) {
          return (p.matrix() - Mat4::Identity()).cwiseAbs().maxCoeff() < 1e-12;
        });
    m.symmetries.clear();
    if (!has_identity) m.symmetries.push_back(Pose::identity());
    m.symmetries.insert(m.symmetries.end(), symmetries.begin(), symmetries.end());
    return m;
  }
};

inline void require_vertices(const ObjectModel &m) {
  if (m.vertices.empty())
    throw Error(ErrorKind::kInvalidArgument, "object model has no vertices");
}

inline double add_distance(const ObjectModel &model, const Pose &est,
                           const Pose &gt) {
  require_vertices(model);
  double sum = 0.0;
  for (const auto &v : model.vertices) sum += (est * v - gt * v).norm();
  return sum / static_cast<double>(model.vertices.size());
}

// Brute-force closest point, O(M^2).
inline double adds_distance(const ObjectModel &model, const Pose &est,
                            const Pose &gt) {
  require_vertices(model);
  const PointCloud e = transform(est, model.vertices);
  const PointCloud g = transform(gt, model.vertices);
  double sum = 0.0;
  for (const auto &p : e) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto &q : g) best = std::min(best, (p - q).squaredNorm());
    sum += std::sqrt(best);
  }
  return sum / static_cast<double>(e.size());
}

// Area under accuracy(theta) = fraction{d < theta} for theta in [0, max],
// as a percentage. The curve is a step function, so the integral is exactly
// mean_i(max(0, max - d_i)) / max. Infinite distances contribute zero.
inline double auc(const std::vector<double> &distances,
                  double max_threshold = 0.10) {
  if (distances.empty())
    throw Error(ErrorKind::kInvalidArgument, "auc: no distances");
  if (!(max_threshold > 0.0))
    throw Error(ErrorKind::kInvalidArgument, "auc: threshold must be positive");
  double sum = 0.0;
  for (double d : distances) {
    if (d < 0.0) throw Error(ErrorKind::kInvalidArgument, "auc: negative distance");
    if (d < max_threshold) sum += max_threshold - d;
  }
  return 100.0 * sum / (max_threshold * static_cast<double>(distances.size()));
}

// Compatibility mode: mean accuracy over `bins` bin-center thresholds.
inline double auc_binned(const std::vector<double> &distances,
                         double max_threshold, int bins) {
  if (distances.empty() || bins <= 0)
    throw Error(ErrorKind::kInvalidArgument, "auc_binned: empty input");
  double acc = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double theta = max_threshold * (b + 0.5) / bins;
    acc += static_cast<double>(std::count_if(
        distances.begin(), distances.end(), [&](double d) { return d < theta; }));
  }
  return 100.0 * acc / (static_cast<double>(bins) * distances.size());
}

inline double recall_below(const std::vector<double> &values, double threshold) {
  if (values.empty())
    throw Error(ErrorKind::kInvalidArgument, "recall over empty list");
  const auto hits = std::count_if(values.begin(), values.end(),
                                  [&](double x) { return x < threshold; });
  return 100.0 * static_cast<double>(hits) / static_cast<double>(values.size());
}

inline double add_01d_recall(const std::vector<double> &distances,
                             double diameter) {
  if (!(diameter > 0.0))
    throw Error(ErrorKind::kInvalidArgument, "diameter must be positive");
  return recall_below(distances, 0.1 * diameter);
}

struct RotTransError {
  double rot_deg = 0.0;
  double trans_m = 0.0;
};

inline double deg_cm_recall(const std::vector<RotTransError> &errors, double deg,
                            double cm) {
  if (errors.empty()) return 0.0;
  const auto hits = std::count_if(errors.begin(), errors.end(), [&](const auto &e) {
    return e.rot_deg < deg && e.trans_m < cm / 100.0;
  });
  return 100.0 * static_cast<double>(hits) / static_cast<double>(errors.size());
}

inline double mssd(const ObjectModel &model, const Pose &est, const Pose &gt) {
  require_vertices(model);
  double best = std::numeric_limits<double>::infinity();
  for (const auto &sym : model.symmetries) {
    const Pose gt_sym = compose(gt, sym);
    double worst = 0.0;
    for (const auto &v : model.vertices)
      worst = std::max(worst, (est * v - gt_sym * v).norm());
    best = std::min(best, worst);
  }
  return best;
}

inline double mspd(const ObjectModel &model, const Pose &est, const Pose &gt,
                   const CameraIntrinsics &k) {
  require_vertices(model);
  auto to_pixel = [&](const Vec3 &c) {
    return Vec2(k.fx * c.x() / c.z() + k.cx, k.fy * c.y() / c.z() + k.cy);
  };
  double best = std::numeric_limits<double>::infinity();
  for (const auto &sym : model.symmetries) {
    const Pose gt_sym = compose(gt, sym);
    double worst = 0.0;
    for (const auto &v : model.vertices) {
      const Vec3 a = est * v, b = gt_sym * v;
      if (!(a.z() > 1e-9) || !(b.z() > 1e-9)) {
        worst = std::numeric_limits<double>::infinity();
        break;
      }
      worst = std::max(worst, (to_pixel(a) - to_pixel(b)).norm());
    }
    best = std::min(best, worst);
  }
  return best;
}

struct ArPartial {
  double ar = 0.0;           // mean of the two below
  double ar_mssd = 0.0;      // mean recall over 0.05d .. 0.5d
  double ar_mspd = 0.0;      // mean recall over 5r .. 50r, r = width / 640
};

inline ArPartial ar_partial(const std::vector<double> &mssd_list,
                            const std::vector<double> &mspd_list,
                            double diameter, const CameraIntrinsics &k) {
  if (mssd_list.size() != mspd_list.size())
    throw Error(ErrorKind::kDimensionMismatch, "ar_partial: list lengths differ");
  if (mssd_list.empty())
    throw Error(ErrorKind::kInvalidArgument, "ar_partial: no frames");
  const double r = k.width / 640.0;
  ArPartial out;
  for (int i = 1; i <= 10; ++i) {
    out.ar_mssd += recall_below(mssd_list, 0.05 * i * diameter);
    out.ar_mspd += recall_below(mspd_list, 5.0 * i * r);
  }
  out.ar_mssd /= 10.0;
  out.ar_mspd /= 10.0;
  out.ar = 0.5 * (out.ar_mssd + out.ar_mspd);
  return out;
}

struct RobustnessStd {
  double value = 0.0;
  std::size_t groups_used = 0;
  std::size_t groups_excluded = 0;  // fewer than two scores
};

// Population std within each object, then the unweighted mean over objects.
inline RobustnessStd robustness_std(
    const std::map<std::string, std::vector<double>> &scores_by_object) {
  RobustnessStd out;
  double sum = 0.0;
  for (const auto &[object, scores] : scores_by_object) {
    if (scores.size() < 2) {
      ++out.groups_excluded;
      continue;
    }
    const double n = static_cast<double>(scores.size());
    const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
    double var = 0.0;
    for (double s : scores) var += (s - mean) * (s - mean);
    sum += std::sqrt(var / n);
    ++out.groups_used;
  }
  if (out.groups_used > 0) out.value = sum / static_cast<double>(out.groups_used);
  return out;
}

}  // namespace roc_pose
