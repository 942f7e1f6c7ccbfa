#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "roc_pose/geometry.hpp"
#include "roc_pose/metrics.hpp"
#include "roc_pose/solvers.hpp"

namespace roc_pose {

struct FrameMetrics {
  std::string object_id;
  int frame_index = 0;
  bool miss = false;
  double add_m = std::numeric_limits<double>::infinity();
  double adds_m = std::numeric_limits<double>::infinity();
  double rot_deg = std::numeric_limits<double>::infinity();
  double trans_m = std::numeric_limits<double>::infinity();
  double mssd_m = std::numeric_limits<double>::infinity();
  double mspd_px = std::numeric_limits<double>::infinity();
};

struct MetricOptions {
  double auc_max_threshold = 0.10;
  int auc_bins = 0;  // 0 = exact integration
};

struct MetricAggregates {
  std::size_t frames = 0;
  double miss_rate = 0.0;  // percent
  double add_auc = 0.0;
  double adds_auc = 0.0;
  double add_01d_recall = 0.0;
  double adds_01d_recall = 0.0;
  std::map<std::string, double> deg_cm_recalls;  // "5deg5cm" -> percent
  ArPartial ar_partial;
  RobustnessStd std_by_object;
};

struct MetricReport {
  std::vector<FrameMetrics> per_frame;
  MetricAggregates aggregates;
};

// Misses keep every distance at +inf, so they count as failures everywhere.
inline FrameMetrics evaluate_frame(const ObjectModel &model, const std::optional<Pose> &est,
                                   const Pose &gt, const CameraIntrinsics &k) {
  FrameMetrics m;
  if (!est) {
    m.miss = true;
    return m;
  }
  m.add_m = add_distance(model, *est, gt);
  m.adds_m = adds_distance(model, *est, gt);
  const PoseError e = pose_error(*est, gt);
  m.rot_deg = e.rot_deg;
  m.trans_m = e.trans_m;
  m.mssd_m = mssd(model, *est, gt);
  m.mspd_px = mspd(model, *est, gt, k);
  return m;
}

inline double auc_with(const std::vector<double> &d, const MetricOptions &opt) {
  return opt.auc_bins > 0 ? auc_binned(d, opt.auc_max_threshold, opt.auc_bins)
                          : auc(d, opt.auc_max_threshold);
}

inline MetricAggregates aggregate(const std::vector<FrameMetrics> &frames, double diameter,
                                  const CameraIntrinsics &k, const MetricOptions &opt = {}) {
  MetricAggregates a;
  a.frames = frames.size();
  if (frames.empty()) return a;
  std::vector<double> add, adds, mssd_l, mspd_l;
  std::vector<RotTransError> rt;
  std::map<std::string, std::vector<double>> per_object;
  std::size_t misses = 0;
  for (const auto &f : frames) {
    add.push_back(f.add_m);
    adds.push_back(f.adds_m);
    mssd_l.push_back(f.mssd_m);
    mspd_l.push_back(f.mspd_px);
    rt.push_back({f.rot_deg, f.trans_m});
    misses += f.miss;
    // Per-pair score: this frame's contribution to the ADD AUC.
    per_object[f.object_id].push_back(
        f.add_m < opt.auc_max_threshold
            ? 100.0 * (opt.auc_max_threshold - f.add_m) / opt.auc_max_threshold
            : 0.0);
  }
  a.miss_rate = 100.0 * static_cast<double>(misses) / static_cast<double>(frames.size());
  a.add_auc = auc_with(add, opt);
  a.adds_auc = auc_with(adds, opt);
  a.add_01d_recall = add_01d_recall(add, diameter);
  a.adds_01d_recall = add_01d_recall(adds, diameter);
  for (int deg : {5, 10, 15})
    a.deg_cm_recalls[std::to_string(deg) + "deg5cm"] = deg_cm_recall(rt, deg, 5.0);
  a.ar_partial = ar_partial(mssd_l, mspd_l, diameter, k);
  a.std_by_object = robustness_std(per_object);
  return a;
}

// ---------------------------------------------------------------------------
// Serialization. Non-finite values are written as null in JSON and "inf" in
// CSV.

inline nlohmann::json json_number(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

inline double number_from_json(const nlohmann::json &j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

inline nlohmann::json pose_to_json(const Pose &p) {
  nlohmann::json a = nlohmann::json::array();
  const Mat4 m = p.matrix();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) a.push_back(m(r, c));
  return a;
}

inline Pose pose_from_json(const nlohmann::json &j) {
  if (!j.is_array() || j.size() != 16)
    throw Error(ErrorKind::kFormat, "pose must be 16 numbers (4x4 row-major)");
  Mat4 m;
  for (int i = 0; i < 16; ++i) m(i / 4, i % 4) = j[i].get<double>();
  return Pose::from_matrix(m);
}

inline nlohmann::json to_json(const FrameMetrics &f) {
  return {{"object_id", f.object_id},        {"frame_index", f.frame_index},
          {"miss", f.miss},                  {"add_m", json_number(f.add_m)},
          {"adds_m", json_number(f.adds_m)}, {"rot_deg", json_number(f.rot_deg)},
          {"trans_m", json_number(f.trans_m)}, {"mssd_m", json_number(f.mssd_m)},
          {"mspd_px", json_number(f.mspd_px)}};
}

inline FrameMetrics frame_metrics_from_json(const nlohmann::json &j) {
  FrameMetrics f;
  f.object_id = j.value("object_id", "");
  f.frame_index = j.at("frame_index").get<int>();
  f.miss = j.at("miss").get<bool>();
  f.add_m = number_from_json(j.at("add_m"));
  f.adds_m = number_from_json(j.at("adds_m"));
  f.rot_deg = number_from_json(j.at("rot_deg"));
  f.trans_m = number_from_json(j.at("trans_m"));
  f.mssd_m = number_from_json(j.at("mssd_m"));
  f.mspd_px = number_from_json(j.at("mspd_px"));
  return f;
}

inline nlohmann::json to_json(const MetricAggregates &a) {
  return {{"frames", a.frames},
          {"miss_rate", a.miss_rate},
          {"add_auc", a.add_auc},
          {"adds_auc", a.adds_auc},
          {"add_01d_recall", a.add_01d_recall},
          {"adds_01d_recall", a.adds_01d_recall},
          {"deg_cm_recalls", a.deg_cm_recalls},
          {"ar_partial",
           {{"ar", a.ar_partial.ar},
            {"ar_mssd", a.ar_partial.ar_mssd},
            {"ar_mspd", a.ar_partial.ar_mspd},
            {"note", "VSD not included"}}},
          {"std_by_object",
           {{"value", a.std_by_object.value},
            {"groups_used", a.std_by_object.groups_used},
            {"groups_excluded", a.std_by_object.groups_excluded}}}};
}

inline nlohmann::json to_json(const MetricReport &r) {
  nlohmann::json frames = nlohmann::json::array();
  for (const auto &f : r.per_frame) frames.push_back(to_json(f));
  return {{"per_frame", frames}, {"aggregates", to_json(r.aggregates)}};
}

inline constexpr const char *kFrameCsvHeader =
    "object_id,frame_index,miss,add_m,adds_m,rot_deg,trans_m,mssd_m,mspd_px";

inline std::string csv_number(double x) {
  if (!std::isfinite(x)) return "inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Column order is fixed by kFrameCsvHeader.
inline std::string to_csv(const MetricReport &r) {
  std::ostringstream out;
  out << kFrameCsvHeader << '\n';
  for (const auto &f : r.per_frame)
    out << f.object_id << ',' << f.frame_index << ',' << (f.miss ? 1 : 0) << ','
        << csv_number(f.add_m) << ',' << csv_number(f.adds_m) << ','
        << csv_number(f.rot_deg) << ',' << csv_number(f.trans_m) << ','
        << csv_number(f.mssd_m) << ',' << csv_number(f.mspd_px) << '\n';
  return out.str();
}

// Accuracy-vs-threshold curves for ADD and ADD-S as a standalone SVG.
inline std::string accuracy_curve_svg(const std::vector<double> &add,
                                      const std::vector<double> &adds,
                                      double max_threshold, const std::string &title) {
  const int w = 480, h = 320, pad = 48, steps = 200;
  auto curve = [&](const std::vector<double> &d) {
    std::ostringstream pts;
    for (int i = 0; i <= steps; ++i) {
      const double theta = max_threshold * i / steps;
      double acc = 0.0;
      for (double x : d) acc += x < theta;
      acc = d.empty() ? 0.0 : acc / d.size();
      const double px = pad + (w - 2 * pad) * double(i) / steps;
      const double py = h - pad - (h - 2 * pad) * acc;
      pts << (i ? " " : "") << px << ',' << py;
    }
    return pts.str();
  };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title << "</text>\n"
    << "<line x1=\"" << pad << "\" y1=\"" << h - pad << "\" x2=\"" << w - pad << "\" y2=\""
    << h - pad << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\""
    << h - pad << "\" stroke=\"black\"/>\n"
    << "<text x=\"" << w / 2 << "\" y=\"" << h - 12
    << "\" text-anchor=\"middle\">threshold (m), max " << max_threshold << "</text>\n"
    << "<text x=\"14\" y=\"" << h / 2 << "\" transform=\"rotate(-90 14 " << h / 2
    << ")\" text-anchor=\"middle\">accuracy</text>\n"
    << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"" << curve(add)
    << "\"/>\n"
    << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" points=\"" << curve(adds)
    << "\"/>\n"
    << "<text x=\"" << w - pad - 60 << "\" y=\"" << h - pad - 40
    << "\" fill=\"#1f77b4\">ADD</text>\n"
    << "<text x=\"" << w - pad - 60 << "\" y=\"" << h - pad - 24
    << "\" fill=\"#d62728\">ADD-S</text>\n"
    << "</svg>\n";
  return s.str();
}

}  // namespace roc_pose
