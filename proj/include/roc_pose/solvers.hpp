#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <string_view>
#include <vector>

#include "roc_pose/error.hpp"
#include "roc_pose/frame.hpp"
#include "roc_pose/geometry.hpp"
#include "roc_pose/parallel.hpp"
#include "roc_pose/random.hpp"
#include "roc_pose/roc.hpp"

namespace roc_pose {

enum class SolverMethod { kUmeyama, kRansacPnp };

inline std::string_view to_string(SolverMethod m) {
  return m == SolverMethod::kUmeyama ? "umeyama" : "ransac_pnp";
}

struct PoseEstimate {
  Pose pose;
  std::size_t inlier_count = 0;
  // Meters for umeyama, pixels (reprojection) for ransac_pnp.
  double residual_rms = 0.0;
  SolverMethod method = SolverMethod::kUmeyama;
  double scale = 1.0;  // only != 1 when umeyama runs with allow_scale
  std::vector<std::size_t> inliers;  // ransac_pnp only, ascending
};

// Query-camera points paired with the same surface points expressed in the
// reference camera frame.
struct Correspondences3d {
  PointCloud query_points;
  PointCloud reference_points;
  std::size_t size() const { return query_points.size(); }
};

// Query pixels paired with reference-frame 3-D points.
struct Correspondences2d3d {
  std::vector<Vec2> pixels;
  PointCloud reference_points;
  std::size_t size() const { return pixels.size(); }
};

inline constexpr std::size_t kMaxCorrespondences = 20000;

namespace detail {

// Sorted random subset of [0, n) of size k (k <= n).
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k,
                                               std::uint64_t seed) {
  std::vector<std::size_t> all(n), out;
  std::iota(all.begin(), all.end(), 0);
  out.reserve(k);
  Rng rng(seed);
  std::sample(all.begin(), all.end(), std::back_inserter(out), k, rng);
  return out;
}

template <typename T>
std::vector<T> select(const std::vector<T> &v,
                      const std::vector<std::size_t> &idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

}  // namespace detail

// Pairs (P_Q, S^-1 * predicted ROC) over pixels where the prediction is valid,
// the query mask is set and depth is positive. Row-major order.
inline Correspondences3d extract_correspondences_3d(
    const RocMap &pred, const SceneFrame &query, const ScaleTransform &s,
    std::size_t max_pairs = kMaxCorrespondences, std::uint64_t seed = 0) {
  query.validate();
  require_same_size(pred.valid_mask(), query.mask, "correspondences");
  const ScaleTransform inv = invert_scale(s);
  Correspondences3d c;
  for (int v = 0; v < query.mask.height(); ++v) {
    for (int u = 0; u < query.mask.width(); ++u) {
      const double d = query.depth(u, v);
      if (!pred.valid(u, v) || !query.mask(u, v) || !(d > 0.0)) continue;
      c.query_points.push_back(query.intrinsics.ray(u, v, d));
      c.reference_points.push_back(inv.apply(pred.at(u, v)));
    }
  }
  if (c.size() < 3)
    throw Error(ErrorKind::kInsufficientCorrespondences,
                std::to_string(c.size()) + " pairs, need 3");
  if (c.size() > max_pairs) {
    const auto idx = detail::sample_indices(c.size(), max_pairs, seed);
    c.query_points = detail::select(c.query_points, idx);
    c.reference_points = detail::select(c.reference_points, idx);
  }
  return c;
}

// RGB-only variant: the query depth is not used.
inline Correspondences2d3d extract_correspondences_2d3d(
    const RocMap &pred, const SceneFrame &query, const ScaleTransform &s,
    std::size_t max_pairs = kMaxCorrespondences, std::uint64_t seed = 0) {
  require_same_size(pred.valid_mask(), query.mask, "correspondences");
  const ScaleTransform inv = invert_scale(s);
  Correspondences2d3d c;
  for (int v = 0; v < query.mask.height(); ++v) {
    for (int u = 0; u < query.mask.width(); ++u) {
      if (!pred.valid(u, v) || !query.mask(u, v)) continue;
      c.pixels.emplace_back(u, v);
      c.reference_points.push_back(inv.apply(pred.at(u, v)));
    }
  }
  if (c.size() < 4)
    throw Error(ErrorKind::kInsufficientCorrespondences,
                std::to_string(c.size()) + " pairs, need 4");
  if (c.size() > max_pairs) {
    const auto idx = detail::sample_indices(c.size(), max_pairs, seed);
    c.pixels = detail::select(c.pixels, idx);
    c.reference_points = detail::select(c.reference_points, idx);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Umeyama

// Least-squares transform mapping src onto dst (dst ~ scale * R * src + t).
// Reflections are removed by flipping the sign of the last singular direction.
inline PoseEstimate umeyama(const PointCloud &src, const PointCloud &dst,
                            bool allow_scale = false) {
  if (src.size() != dst.size())
    throw Error(ErrorKind::kDimensionMismatch, "umeyama: unequal lengths");
  if (src.size() < 3)
    throw Error(ErrorKind::kInsufficientCorrespondences,
                std::to_string(src.size()) + " pairs, need 3");
  const double n = static_cast<double>(src.size());
  const Vec3 mu_src = centroid(src);
  const Vec3 mu_dst = centroid(dst);
  Mat3 cov = Mat3::Zero();
  double var_src = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Vec3 a = src[i] - mu_src;
    cov += (dst[i] - mu_dst) * a.transpose();
    var_src += a.squaredNorm();
  }
  cov /= n;
  var_src /= n;

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  if (!(sv[0] > 0.0) || sv[1] < 1e-12 * sv[0])
    throw Error(ErrorKind::kDegenerateGeometry,
                "correspondences are collinear or coincident");
  Vec3 d = Vec3::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0)
    d[2] = -1.0;

  PoseEstimate est;
  est.method = SolverMethod::kUmeyama;
  est.pose.rotation = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
  est.scale = allow_scale ? sv.dot(d) / var_src : 1.0;
  est.pose.translation = mu_dst - est.scale * est.pose.rotation * mu_src;
  est.inlier_count = src.size();
  double sq = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i)
    sq += (est.scale * (est.pose.rotation * src[i]) + est.pose.translation -
           dst[i])
              .squaredNorm();
  est.residual_rms = std::sqrt(sq / n);
  return est;
}

// The returned pose maps query-camera points into the reference camera.
inline PoseEstimate umeyama(const Correspondences3d &c, bool allow_scale = false) {
  return umeyama(c.query_points, c.reference_points, allow_scale);
}

// ---------------------------------------------------------------------------
// Perspective-n-point

struct RansacConfig {
  int iterations = 1024;
  double inlier_px = 2.0;
  std::size_t min_inliers = 12;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  int refine_iterations = 30;
};

namespace detail {

// Real roots of sum_i coeffs[i] x^i, found as companion-matrix eigenvalues and
// polished with Newton steps.
inline std::vector<double> real_roots(std::vector<double> coeffs) {
  double scale = 0.0;
  for (double c : coeffs) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) return {};
  while (!coeffs.empty() && std::abs(coeffs.back()) <= 1e-14 * scale)
    coeffs.pop_back();
  const int deg = static_cast<int>(coeffs.size()) - 1;
  if (deg < 1) return {};
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 0; i < deg; ++i) comp(0, i) = -coeffs[deg - 1 - i] / coeffs[deg];
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  std::vector<double> roots;
  for (int i = 0; i < deg; ++i) {
    const auto z = es.eigenvalues()[i];
    if (std::abs(z.imag()) > 1e-6 * std::max(1.0, std::abs(z))) continue;
    double x = z.real();
    for (int it = 0; it < 5; ++it) {
      double p = 0.0, dp = 0.0;
      for (int k = deg; k >= 0; --k) {
        dp = dp * x + p;
        p = p * x + coeffs[k];
      }
      if (dp == 0.0) break;
      x -= p / dp;
    }
    roots.push_back(x);
  }
  return roots;
}

// Kabsch on 3 or more points without the degeneracy check (3 points are
// always coplanar; only collinear triples fail, caught by the caller).
inline std::optional<Pose> rigid_fit(const PointCloud &src, const PointCloud &dst) {
  const Vec3 ms = centroid(src), md = centroid(dst);
  Mat3 cov = Mat3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i)
    cov += (dst[i] - md) * (src[i] - ms).transpose();
  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (!(svd.singularValues()[1] > 1e-12 * svd.singularValues()[0]))
    return std::nullopt;
  Vec3 d = Vec3::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0)
    d[2] = -1.0;
  Pose p;
  p.rotation = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
  p.translation = md - p.rotation * ms;
  return p;
}

inline double reprojection_error(const Pose &cam_from_obj,
                                 const CameraIntrinsics &k, const Vec3 &point,
                                 const Vec2 &pixel) {
  const Vec3 c = cam_from_obj * point;
  if (!(c.z() > 1e-9)) return std::numeric_limits<double>::infinity();
  const Vec2 uv(k.fx * c.x() / c.z() + k.cx, k.fy * c.y() / c.z() + k.cy);
  return (uv - pixel).norm();
}

}  // namespace detail

// Grunert's P3P: camera-from-object poses consistent with three pixel/point
// pairs. Up to four solutions.
inline std::vector<Pose> p3p(const std::array<Vec2, 3> &pixels,
                             const std::array<Vec3, 3> &points,
                             const CameraIntrinsics &k) {
  std::array<Vec3, 3> j;
  for (int i = 0; i < 3; ++i)
    j[i] = Vec3((pixels[i].x() - k.cx) / k.fx, (pixels[i].y() - k.cy) / k.fy, 1.0)
               .normalized();
  const double a2 = (points[1] - points[2]).squaredNorm();
  const double b2 = (points[0] - points[2]).squaredNorm();
  const double c2 = (points[0] - points[1]).squaredNorm();
  if (!(b2 > 0.0) || !(a2 > 0.0) || !(c2 > 0.0)) return {};
  const double ca = j[1].dot(j[2]), cb = j[0].dot(j[2]), cg = j[0].dot(j[1]);
  const double amc = (a2 - c2) / b2, apc = (a2 + c2) / b2;

  const double a4 = (amc - 1) * (amc - 1) - 4 * c2 / b2 * ca * ca;
  const double a3 = 4 * (amc * (1 - amc) * cb - (1 - apc) * ca * cg +
                         2 * c2 / b2 * ca * ca * cb);
  const double a2c = 2 * (amc * amc - 1 + 2 * amc * amc * cb * cb +
                          2 * (b2 - c2) / b2 * ca * ca -
                          4 * apc * ca * cb * cg + 2 * (b2 - a2) / b2 * cg * cg);
  const double a1 = 4 * (-amc * (1 + amc) * cb + 2 * a2 / b2 * cg * cg * cb -
                         (1 - apc) * ca * cg);
  const double a0 = (1 + amc) * (1 + amc) - 4 * a2 / b2 * cg * cg;

  std::vector<Pose> out;
  const PointCloud obj(points.begin(), points.end());
  for (double v : detail::real_roots({a0, a1, a2c, a3, a4})) {
    if (!(v > 0.0)) continue;
    const double den = 2 * (cg - v * ca);
    if (std::abs(den) < 1e-15) continue;
    const double u =
        ((-1 + amc) * v * v - 2 * amc * cb * v + 1 + amc) / den;
    if (!(u > 0.0)) continue;
    const double q = 1 + u * u - 2 * u * cg;
    if (!(q > 0.0)) continue;
    const double s1 = std::sqrt(c2 / q);
    const PointCloud cam{s1 * j[0], u * s1 * j[1], v * s1 * j[2]};
    if (auto pose = detail::rigid_fit(obj, cam)) out.push_back(*pose);
  }
  return out;
}

// Levenberg-Marquardt on reprojection error, left-multiplicative rotation
// update. Returns the refined camera-from-object pose.
inline Pose refine_pnp(const Pose &initial, const std::vector<Vec2> &pixels,
                       const PointCloud &points, const CameraIntrinsics &k,
                       const std::vector<std::size_t> &subset,
                       int max_iterations = 30) {
  using Vec6 = Eigen::Matrix<double, 6, 1>;
  using Mat6 = Eigen::Matrix<double, 6, 6>;
  auto cost = [&](const Pose &p) {
    double sum = 0.0;
    for (auto i : subset) {
      const double e = detail::reprojection_error(p, k, points[i], pixels[i]);
      sum += e * e;
    }
    return sum;
  };
  Pose pose = initial;
  double current = cost(pose);
  double lambda = 1e-3;
  for (int it = 0; it < max_iterations && std::isfinite(current); ++it) {
    Mat6 jtj = Mat6::Zero();
    Vec6 jtr = Vec6::Zero();
    for (auto i : subset) {
      const Vec3 c = pose * points[i];
      if (!(c.z() > 1e-9)) continue;
      const double iz = 1.0 / c.z();
      const Vec2 r(k.fx * c.x() * iz + k.cx - pixels[i].x(),
                   k.fy * c.y() * iz + k.cy - pixels[i].y());
      Eigen::Matrix<double, 2, 3> dproj;
      dproj << k.fx * iz, 0, -k.fx * c.x() * iz * iz, 0, k.fy * iz,
          -k.fy * c.y() * iz * iz;
      Mat3 skew;
      skew << 0, c.z(), -c.y(), -c.z(), 0, c.x(), c.y(), -c.x(), 0;  // -[c]x
      Eigen::Matrix<double, 2, 6> jac;
      jac.leftCols<3>() = dproj * skew;
      jac.rightCols<3>() = dproj;
      jtj += jac.transpose() * jac;
      jtr += jac.transpose() * r;
    }
    bool improved = false;
    for (int attempt = 0; attempt < 10 && !improved; ++attempt) {
      Mat6 damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
      const Vec6 step = -damped.ldlt().solve(jtr);
      if (!step.allFinite()) break;
      const Pose delta = Pose::from_axis_angle(
          step.head<3>(), step.head<3>().norm(), step.tail<3>());
      const Pose candidate = compose(delta, pose);
      const double next = cost(candidate);
      if (next < current) {
        const double gain = current - next;
        pose = candidate;
        current = next;
        lambda = std::max(lambda * 0.3, 1e-12);
        improved = true;
        if (gain <= 1e-18 * std::max(1.0, current) || step.norm() < 1e-15)
          return pose;
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) break;
  }
  return pose;
}

// RANSAC over P3P hypotheses (three points solve, a fourth disambiguates),
// followed by refinement on the consensus set. All hypotheses are drawn up
// front from cfg.seed, so the result is independent of cfg.jobs; ties go to
// the lowest hypothesis index. The pose maps reference-frame points into
// the query camera.
inline PoseEstimate ransac_pnp(const Correspondences2d3d &c,
                               const CameraIntrinsics &k,
                               const RansacConfig &cfg = {}) {
  if (c.pixels.size() != c.reference_points.size())
    throw Error(ErrorKind::kDimensionMismatch, "ransac_pnp: unequal lengths");
  if (c.size() < 4)
    throw Error(ErrorKind::kInsufficientCorrespondences,
                std::to_string(c.size()) + " pairs, need 4");
  k.validate();
  const std::size_t n = c.size();
  const int iterations = std::max(1, cfg.iterations);

  std::vector<std::array<std::size_t, 4>> samples(iterations);
  {
    Rng rng(cfg.seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (auto &s : samples) {
      for (std::size_t m = 0; m < 4; ++m) {
        std::size_t idx;
        do {
          idx = pick(rng);
        } while (std::find(s.begin(), s.begin() + m, idx) != s.begin() + m);
        s[m] = idx;
      }
    }
  }

  auto count_inliers = [&](const Pose &pose) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i)
      count += detail::reprojection_error(pose, k, c.reference_points[i],
                                          c.pixels[i]) < cfg.inlier_px;
    return count;
  };

  struct Hypothesis {
    std::optional<Pose> pose;
    std::size_t inliers = 0;
  };
  std::vector<Hypothesis> hyps(samples.size());
  parallel_for(samples.size(), cfg.jobs, [&](std::size_t h) {
    const auto &s = samples[h];
    const auto solutions =
        p3p({c.pixels[s[0]], c.pixels[s[1]], c.pixels[s[2]]},
            {c.reference_points[s[0]], c.reference_points[s[1]],
             c.reference_points[s[2]]},
            k);
    double best_err = std::numeric_limits<double>::infinity();
    for (const auto &pose : solutions) {
      const double e = detail::reprojection_error(
          pose, k, c.reference_points[s[3]], c.pixels[s[3]]);
      if (e < best_err) {
        best_err = e;
        hyps[h].pose = pose;
      }
    }
    if (hyps[h].pose) hyps[h].inliers = count_inliers(*hyps[h].pose);
  });

  std::size_t best = 0;
  for (std::size_t h = 1; h < hyps.size(); ++h)
    if (hyps[h].inliers > hyps[best].inliers) best = h;
  const std::size_t needed = std::max<std::size_t>(cfg.min_inliers, 4);
  if (!hyps[best].pose || hyps[best].inliers < needed)
    throw Error(ErrorKind::kNoConsensus,
                "best hypothesis has " + std::to_string(hyps[best].inliers) +
                    " inliers, need " + std::to_string(needed));

  auto inlier_set = [&](const Pose &pose) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (detail::reprojection_error(pose, k, c.reference_points[i],
                                     c.pixels[i]) < cfg.inlier_px)
        idx.push_back(i);
    return idx;
  };

  Pose pose = *hyps[best].pose;
  std::vector<std::size_t> inliers = inlier_set(pose);
  for (int round = 0; round < 3; ++round) {
    const Pose refined = refine_pnp(pose, c.pixels, c.reference_points, k,
                                    inliers, cfg.refine_iterations);
    auto next = inlier_set(refined);
    if (next.size() < needed) break;
    pose = refined;
    const bool stable = next == inliers;
    inliers = std::move(next);
    if (stable) break;
  }

  PoseEstimate est;
  est.method = SolverMethod::kRansacPnp;
  est.pose = pose;
  est.inlier_count = inliers.size();
  double sq = 0.0;
  for (auto i : inliers) {
    const double e =
        detail::reprojection_error(pose, k, c.reference_points[i], c.pixels[i]);
    sq += e * e;
  }
  est.residual_rms = inliers.empty() ? 0.0 : std::sqrt(sq / inliers.size());
  est.inliers = std::move(inliers);
  return est;
}

// ---------------------------------------------------------------------------

struct PoseError {
  double rot_deg = 0.0;
  double trans_m = 0.0;
};

inline PoseError pose_error(const Pose &est, const Pose &gt) {
  return {rotation_angle(est.rotation * gt.rotation.transpose()) * 180.0 /
              std::numbers::pi,
          (est.translation - gt.translation).norm()};
}

}  // namespace roc_pose
