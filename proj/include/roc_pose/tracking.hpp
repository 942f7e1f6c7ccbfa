#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "roc_pose/parallel.hpp"
#include "roc_pose/pipeline.hpp"
#include "roc_pose/predictor.hpp"
#include "roc_pose/report.hpp"
#include "roc_pose/scenes.hpp"

// First-frame-reference tracking: frame 0 fixes the ROC space once and every
// frame (frame 0 included) is estimated against it independently. There is
// no pose propagation between frames.
namespace roc_pose {

struct TrackOptions {
  EstimateOptions estimate;
  unsigned jobs = 1;
};

struct TrackFrame {
  int frame_index = 0;
  std::optional<PoseEstimate> estimate;  // empty on a miss
  std::string failure;                   // error text on a miss
  Pose gt_relative;                      // query -> reference ground truth
  double seconds = 0.0;
};

struct TrackRun {
  int reference_index = 0;
  std::vector<TrackFrame> frames;
};

// Per-frame predictor and solver seeds derive from the frame's bundle index,
// so reordering frames reorders results without changing them.
inline TrackRun track_sequence(const SceneBundle &bundle, const CorruptionConfig &predictor,
                               const TrackOptions &opt = {}) {
  if (bundle.frames.size() < 2)
    throw Error(ErrorKind::kInvalidArgument, "tracking needs at least 2 frames");
  const SceneFrame &reference = bundle.frames.front();
  const ReferenceRoc ref_roc = build_reference_roc(reference);

  TrackRun run;
  run.frames.resize(bundle.frames.size());
  parallel_for(bundle.frames.size(), opt.jobs, [&](std::size_t i) {
    const SceneFrame &frame = bundle.frames[i];
    TrackFrame &out = run.frames[i];
    out.frame_index = frame.frame_index;
    out.gt_relative = relative_pose(reference, frame);
    const auto start = std::chrono::steady_clock::now();
    try {
      CorruptionConfig cfg = predictor;
      cfg.seed = derive_seed(predictor.seed, static_cast<std::uint64_t>(frame.frame_index));
      const RocMap pred = oracle_predict(frame, out.gt_relative, ref_roc.transform, cfg);
      EstimateOptions est_opt = opt.estimate;
      est_opt.seed = derive_seed(opt.estimate.seed, static_cast<std::uint64_t>(frame.frame_index));
      out.estimate = estimate_relative_pose(pred, frame, ref_roc.transform, est_opt);
    } catch (const Error &e) {
      out.estimate.reset();
      out.failure = e.what();
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });
  return run;
}

struct TrackSummary {
  MetricReport report;
  double miss_rate = 0.0;        // percent
  double mean_frame_seconds = 0.0;
};

inline TrackSummary summarize_track(const TrackRun &run, const SceneBundle &bundle,
                                    const MetricOptions &opt = {}) {
  TrackSummary s;
  const Pose &ref_object_pose = bundle.frames.at(run.reference_index).world_pose;
  double total = 0.0;
  for (std::size_t i = 0; i < run.frames.size(); ++i) {
    const TrackFrame &f = run.frames[i];
    const Pose gt = compose(invert(f.gt_relative), ref_object_pose);
    std::optional<Pose> est;
    if (f.estimate) est = object_pose_in_query(f.estimate->pose, ref_object_pose);
    FrameMetrics m = evaluate_frame(bundle.model, est, gt, bundle.intrinsics);
    m.object_id = bundle.object_id;
    m.frame_index = f.frame_index;
    s.report.per_frame.push_back(m);
    total += f.seconds;
  }
  s.report.aggregates =
      aggregate(s.report.per_frame, bundle.model.diameter, bundle.intrinsics, opt);
  s.miss_rate = s.report.aggregates.miss_rate;
  s.mean_frame_seconds = run.frames.empty() ? 0.0 : total / run.frames.size();
  return s;
}

}  // namespace roc_pose
