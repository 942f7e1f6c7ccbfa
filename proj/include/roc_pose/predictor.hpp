#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>

#include "roc_pose/error.hpp"
#include "roc_pose/frame.hpp"
#include "roc_pose/random.hpp"
#include "roc_pose/roc.hpp"

namespace roc_pose {

// Pixel rectangle [x, x + width) x [y, y + height).
struct PixelRect {
  int x = 0, y = 0, width = 0, height = 0;
  bool contains(int u, int v) const {
    return u >= x && v >= y && u < x + width && v < y + height;
  }
};

// Stand-in for network prediction error, applied in this fixed order:
// coordinate noise, pixel dropout, occluder, 8-bit quantization.
struct CorruptionConfig {
  double coord_noise_sigma = 0.0;  // ROC units
  double pixel_dropout = 0.0;      // probability a valid pixel is dropped
  std::optional<PixelRect> occluder;
  bool quantize_8bit = false;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(coord_noise_sigma >= 0.0) || !std::isfinite(coord_noise_sigma))
      throw Error(ErrorKind::kInvalidArgument, "coord_noise_sigma must be >= 0");
    if (!(pixel_dropout >= 0.0 && pixel_dropout <= 1.0))
      throw Error(ErrorKind::kInvalidArgument, "pixel_dropout must be in [0, 1]");
  }
};

// Geometric oracle: the ground-truth query ROC, corrupted per cfg. Pure in
// (query, gt_relative, s, cfg); the same seed always gives the same map.
inline RocMap oracle_predict(const SceneFrame &query, const Pose &gt_relative,
                             const ScaleTransform &s, const CorruptionConfig &cfg) {
  cfg.validate();
  RocMap map = build_query_roc(query, gt_relative, s);
  const int w = map.width(), h = map.height();

  if (cfg.coord_noise_sigma > 0.0) {
    Rng rng(derive_seed(cfg.seed, 1));
    std::normal_distribution<double> noise(0.0, cfg.coord_noise_sigma);
    for (int v = 0; v < h; ++v)
      for (int u = 0; u < w; ++u)
        if (map.valid(u, v)) {
          const Vec3 c = map.at(u, v);
          const double nx = noise(rng), ny = noise(rng), nz = noise(rng);
          map.set(u, v, c + Vec3(nx, ny, nz));
        }
  }
  if (cfg.pixel_dropout > 0.0) {
    Rng rng(derive_seed(cfg.seed, 2));
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int v = 0; v < h; ++v)
      for (int u = 0; u < w; ++u)
        if (map.valid(u, v) && coin(rng) < cfg.pixel_dropout) map.invalidate(u, v);
  }
  if (cfg.occluder) {
    for (int v = 0; v < h; ++v)
      for (int u = 0; u < w; ++u)
        if (cfg.occluder->contains(u, v)) map.invalidate(u, v);
  }
  if (cfg.quantize_8bit) map = decode_roc_image(encode_roc_image(map, RocEncoding::k8Bit));
  return map;
}

// ---------------------------------------------------------------------------
// Cross-attention: q = Fq Wq, k = Fa Wk, v = Fa Wv,
// out = softmax(q k^T / sqrt(d_k)) v, softmax taken along each row.

struct AttentionWeights {
  Eigen::MatrixXd w_q;  // d_model x d_k
  Eigen::MatrixXd w_k;  // d_model x d_k
  Eigen::MatrixXd w_v;  // d_model x d_v

  Eigen::Index d_k() const { return w_k.cols(); }

  void validate(Eigen::Index d_query, Eigen::Index d_context) const {
    if (w_q.rows() != d_query || w_k.rows() != d_context ||
        w_v.rows() != d_context || w_q.cols() != w_k.cols() || w_k.cols() == 0)
      throw Error(ErrorKind::kDimensionMismatch, "attention weight shapes");
    if (!w_q.allFinite() || !w_k.allFinite() || !w_v.allFinite())
      throw Error(ErrorKind::kInvalidArgument, "attention weights not finite");
  }
};

struct AttentionForward {
  Eigen::MatrixXd q, k, v;
  Eigen::MatrixXd weights;  // T_q x T_kv, rows sum to 1
  Eigen::MatrixXd output;   // T_q x d_v
};

inline Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd &scores) {
  Eigen::MatrixXd p(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double m = scores.row(i).maxCoeff();
    p.row(i) = (scores.row(i).array() - m).exp().matrix();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

inline AttentionForward cross_attention_forward(const Eigen::MatrixXd &query_tokens,
                                                const Eigen::MatrixXd &context_tokens,
                                                const AttentionWeights &w) {
  w.validate(query_tokens.cols(), context_tokens.cols());
  if (context_tokens.rows() == 0)
    throw Error(ErrorKind::kInvalidArgument, "attention: no context tokens");
  AttentionForward f;
  f.q = query_tokens * w.w_q;
  f.k = context_tokens * w.w_k;
  f.v = context_tokens * w.w_v;
  f.weights = softmax_rows(f.q * f.k.transpose() / std::sqrt(double(w.d_k())));
  f.output = f.weights * f.v;
  return f;
}

inline Eigen::MatrixXd cross_attention(const Eigen::MatrixXd &query_tokens,
                                       const Eigen::MatrixXd &context_tokens,
                                       const AttentionWeights &w) {
  return cross_attention_forward(query_tokens, context_tokens, w).output;
}

struct AttentionGradients {
  Eigen::MatrixXd query_tokens;
  Eigen::MatrixXd context_tokens;
  Eigen::MatrixXd w_q, w_k, w_v;
  Eigen::MatrixXd scores;  // gradient w.r.t. pre-softmax scores
};

// Reverse-mode gradients of cross_attention given d(loss)/d(output).
inline AttentionGradients attention_grad(const Eigen::MatrixXd &query_tokens,
                                         const Eigen::MatrixXd &context_tokens,
                                         const AttentionWeights &w,
                                         const Eigen::MatrixXd &upstream) {
  const AttentionForward f = cross_attention_forward(query_tokens, context_tokens, w);
  if (upstream.rows() != f.output.rows() || upstream.cols() != f.output.cols())
    throw Error(ErrorKind::kDimensionMismatch, "attention upstream shape");
  const double inv_sqrt_dk = 1.0 / std::sqrt(double(w.d_k()));

  const Eigen::MatrixXd d_weights = upstream * f.v.transpose();
  const Eigen::MatrixXd d_v = f.weights.transpose() * upstream;
  // Softmax Jacobian per row: dS = P * (dP - <dP, P>).
  const Eigen::VectorXd row_dot = (d_weights.array() * f.weights.array()).rowwise().sum();
  Eigen::MatrixXd d_scores =
      (f.weights.array() * (d_weights.colwise() - row_dot).array()).matrix();
  const Eigen::MatrixXd d_q = d_scores * f.k * inv_sqrt_dk;
  const Eigen::MatrixXd d_k = d_scores.transpose() * f.q * inv_sqrt_dk;

  AttentionGradients g;
  g.w_q = query_tokens.transpose() * d_q;
  g.w_k = context_tokens.transpose() * d_k;
  g.w_v = context_tokens.transpose() * d_v;
  g.query_tokens = d_q * w.w_q.transpose();
  g.context_tokens = d_k * w.w_k.transpose() + d_v * w.w_v.transpose();
  g.scores = std::move(d_scores);
  return g;
}

}  // namespace roc_pose
