#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "roc_pose/roc_pose.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace roc_pose;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kIoError = 3, kFormatError = 4, kNumericError = 5 };

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::kInvalidArgument: return kUsage;
    case ErrorKind::kIo: return kIoError;
    case ErrorKind::kFormat:
    case ErrorKind::kDimensionMismatch: return kFormatError;
    default: return kNumericError;
  }
}

struct Common {
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned jobs = 1;
  bool no_timing = false;
};

struct ResolvedSeed {
  std::uint64_t value = 0;
  std::string source;
};

ResolvedSeed resolve_seed(const std::optional<std::uint64_t> &flag) {
  if (flag) return {*flag, "flag"};
  if (const char *env = std::getenv("ROC_POSE_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
      return {v, "ROC_POSE_SEED"};
    } catch (const std::exception &) {
      throw Error(ErrorKind::kInvalidArgument,
                  std::string("ROC_POSE_SEED is not an unsigned integer: ") + env);
    }
  }
  return {0, "default"};
}

json header(const std::string &command, const ResolvedSeed &seed, json config) {
  return {{"toolkit", {{"name", "roc_pose"}, {"version", ROC_POSE_VERSION}}},
          {"command", command},
          {"seed", seed.value},
          {"seed_source", seed.source},
          {"config", std::move(config)}};
}

void emit(const json &j, const std::string &out) {
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
    return;
  }
  if (const auto parent = fs::path(out).parent_path(); !parent.empty()) {
    std::error_code ec;
    fs::create_directories(parent, ec);
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIo, "--out: cannot write " + out);
  f << text;
}

void emit_text(const std::string &text, const std::string &out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIo, "--out: cannot write " + out);
  f << text;
}

json read_json_file(const std::string &path, const std::string &flag) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, flag + ": cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception &e) {
    throw Error(ErrorKind::kFormat, flag + ": " + path + ": " + e.what());
  }
}

SceneBundle open_bundle(const std::string &path) {
  if (path.empty()) throw Error(ErrorKind::kInvalidArgument, "--bundle is required");
  return load_bundle(path);
}

const SceneFrame &frame_at(const SceneBundle &b, int index, const std::string &flag) {
  if (index < 0 || static_cast<std::size_t>(index) >= b.frames.size())
    throw Error(ErrorKind::kInvalidArgument,
                flag + ": frame " + std::to_string(index) + " out of range (bundle has " +
                    std::to_string(b.frames.size()) + ")");
  return b.frames[static_cast<std::size_t>(index)];
}

// ---------------------------------------------------------------------------
// Predictor corruption: an optional JSON file, overridden by explicit flags.

struct CorruptionFlags {
  std::string file;
  double noise = 0.0;
  double dropout = 0.0;
  std::vector<int> occluder;
  bool quantize = false;
  CLI::Option *noise_opt = nullptr, *dropout_opt = nullptr, *occluder_opt = nullptr,
              *quantize_opt = nullptr;

  void add(CLI::App *app) {
    app->add_option("--corruption", file, "Corruption config JSON")->check(CLI::ExistingFile);
    noise_opt = app->add_option("--coord-noise", noise, "ROC coordinate noise sigma");
    dropout_opt = app->add_option("--dropout", dropout, "Pixel dropout probability");
    occluder_opt = app->add_option("--occluder", occluder, "Occluder rectangle x y w h")
                       ->expected(4);
    quantize_opt = app->add_flag("--quantize", quantize, "Round-trip ROC through 8 bits");
  }

  CorruptionConfig resolve(std::uint64_t seed) const {
    CorruptionConfig cfg;
    cfg.seed = seed;
    if (!file.empty()) {
      const json j = read_json_file(file, "--corruption");
      try {
        cfg.coord_noise_sigma = j.value("coord_noise_sigma", 0.0);
        cfg.pixel_dropout = j.value("pixel_dropout", 0.0);
        cfg.quantize_8bit = j.value("quantize_8bit", false);
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("occluder") && !j.at("occluder").is_null()) {
          const auto &o = j.at("occluder");
          cfg.occluder = PixelRect{o.at("x").get<int>(), o.at("y").get<int>(),
                                   o.at("width").get<int>(), o.at("height").get<int>()};
        }
      } catch (const json::exception &e) {
        throw Error(ErrorKind::kFormat, "--corruption: " + file + ": " + e.what());
      }
    }
    if (noise_opt->count()) cfg.coord_noise_sigma = noise;
    if (dropout_opt->count()) cfg.pixel_dropout = dropout;
    if (occluder_opt->count())
      cfg.occluder = PixelRect{occluder[0], occluder[1], occluder[2], occluder[3]};
    if (quantize_opt->count()) cfg.quantize_8bit = quantize;
    try {
      cfg.validate();
    } catch (const Error &e) {
      throw Error(e.kind(), "corruption: " + std::string(e.what()));
    }
    return cfg;
  }
};

json to_json(const CorruptionConfig &c) {
  json occ = nullptr;
  if (c.occluder)
    occ = {{"x", c.occluder->x},
           {"y", c.occluder->y},
           {"width", c.occluder->width},
           {"height", c.occluder->height}};
  return {{"coord_noise_sigma", c.coord_noise_sigma},
          {"pixel_dropout", c.pixel_dropout},
          {"occluder", occ},
          {"quantize_8bit", c.quantize_8bit},
          {"seed", c.seed}};
}

struct SolverFlags {
  std::string solver = "umeyama";
  bool allow_scale = false;
  int ransac_iterations = 1024;
  double inlier_px = 2.0;
  std::size_t min_inliers = 12;
  std::size_t max_pairs = kMaxCorrespondences;

  void add(CLI::App *app) {
    app->add_option("--solver", solver, "umeyama or ransac_pnp")
        ->check(CLI::IsMember({"umeyama", "ransac_pnp"}));
    app->add_flag("--allow-scale", allow_scale, "Let Umeyama fit a scale (diagnosis)");
    app->add_option("--ransac-iters", ransac_iterations, "RANSAC hypotheses")
        ->check(CLI::PositiveNumber);
    app->add_option("--inlier-px", inlier_px, "RANSAC inlier threshold in pixels")
        ->check(CLI::PositiveNumber);
    app->add_option("--min-inliers", min_inliers, "Minimum RANSAC consensus");
    app->add_option("--max-pairs", max_pairs, "Correspondence subsample cap")
        ->check(CLI::PositiveNumber);
  }

  EstimateOptions resolve(std::uint64_t seed, unsigned jobs) const {
    EstimateOptions o;
    o.solver = solver == "ransac_pnp" ? SolverMethod::kRansacPnp : SolverMethod::kUmeyama;
    o.allow_scale = allow_scale;
    o.ransac.iterations = ransac_iterations;
    o.ransac.inlier_px = inlier_px;
    o.ransac.min_inliers = min_inliers;
    o.ransac.jobs = jobs;
    o.max_pairs = max_pairs;
    o.seed = seed;
    return o;
  }

  json config() const {
    return {{"solver", solver},
            {"allow_scale", allow_scale},
            {"ransac_iterations", ransac_iterations},
            {"inlier_px", inlier_px},
            {"min_inliers", min_inliers},
            {"max_pairs", max_pairs}};
  }
};

json estimate_json(const PoseEstimate &e) {
  json j = {{"method", std::string(to_string(e.method))},
            {"relative_pose", pose_to_json(e.pose)},
            {"inlier_count", e.inlier_count},
            {"residual_rms", e.residual_rms}};
  if (e.scale != 1.0) j["scale"] = e.scale;
  return j;
}

PoseEstimate estimate_from_json(const json &j, const std::string &where) {
  try {
    PoseEstimate e;
    e.pose = pose_from_json(j.at("relative_pose"));
    e.inlier_count = j.value("inlier_count", std::size_t{0});
    e.residual_rms = j.value("residual_rms", 0.0);
    e.method = j.value("method", std::string("umeyama")) == "ransac_pnp"
                   ? SolverMethod::kRansacPnp
                   : SolverMethod::kUmeyama;
    return e;
  } catch (const json::exception &ex) {
    throw Error(ErrorKind::kFormat, where + ": " + ex.what());
  }
}

json error_json(const Pose &est, const Pose &gt) {
  const PoseError e = pose_error(est, gt);
  return {{"rot_rad", rotation_angle(est.rotation * gt.rotation.transpose())},
          {"rot_deg", e.rot_deg},
          {"trans_m", e.trans_m}};
}

std::string fmt(double x, int prec = 2) {
  if (!std::isfinite(x)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, x);
  return buf;
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string kind = "box";
  int frames = 2;
  double gap_deg = 0.0, translation_gap = 0.0, occlusion = 0.0, noise = 0.0, size = 0.15;
  int samples = 1024;
  bool no_rgb = false;
};

int cmd_generate(const GenerateArgs &a, const Common &c) {
  if (c.out.empty()) throw Error(ErrorKind::kInvalidArgument, "--out is required");
  const auto seed = resolve_seed(c.seed);
  OrbitSpec spec;
  spec.kind = parse_object_kind(a.kind);
  spec.size_m = a.size;
  spec.samples = a.samples;
  spec.frames = a.frames;
  spec.gap_deg = a.gap_deg;
  spec.translation_gap_m = a.translation_gap;
  spec.occlusion = a.occlusion;
  spec.depth_noise = a.noise;
  spec.rgb = !a.no_rgb;
  spec.seed = seed.value;
  if (!(a.size > 0.0)) throw Error(ErrorKind::kInvalidArgument, "--size must be positive");
  SceneBundle b = generate_orbit_bundle(spec);
  b.generator = header("generate", seed, to_json(spec));
  save_bundle(b, c.out);
  std::cerr << "wrote " << b.frames.size() << " frames of " << b.object_id << " to " << c.out
            << " (diameter " << fmt(b.model.diameter, 4) << " m)\n";
  return kOk;
}

struct EstimateArgs {
  std::string bundle;
  std::vector<int> refs;
  std::optional<int> query;
  SolverFlags solver;
  CorruptionFlags corruption;
  std::string roc_out;
};

int cmd_estimate(const EstimateArgs &a, const Common &c) {
  const auto seed = resolve_seed(c.seed);
  const SceneBundle b = open_bundle(a.bundle);
  const std::vector<int> refs = a.refs.empty() ? std::vector<int>{0} : a.refs;
  const int qi = a.query.value_or(static_cast<int>(b.frames.size()) - 1);
  const SceneFrame &query = frame_at(b, qi, "--query");
  const CorruptionConfig corruption = a.corruption.resolve(seed.value);
  const EstimateOptions opt = a.solver.resolve(seed.value, c.jobs);

  json config = a.solver.config();
  config["bundle"] = a.bundle;
  config["references"] = refs;
  config["query"] = qi;
  config["corruption"] = to_json(corruption);

  json out = header("estimate", seed, config);
  out["query_index"] = qi;
  json estimates = json::array();
  std::optional<Pose> first_ok;
  std::optional<Error> first_error;
  double seconds = 0.0;
  for (int ri : refs) {
    const SceneFrame &ref = frame_at(b, ri, "--ref");
    json e = {{"reference_index", ri}};
    const auto start = std::chrono::steady_clock::now();
    try {
      const ReferenceRoc roc = build_reference_roc(ref);
      const Pose gt = relative_pose(ref, query);
      CorruptionConfig cc = corruption;
      cc.seed = derive_seed(corruption.seed, static_cast<std::uint64_t>(ri));
      const RocMap pred = oracle_predict(query, gt, roc.transform, cc);
      if (!a.roc_out.empty())
        save_roc_map(fs::path(a.roc_out) / ("roc_ref" + std::to_string(ri)), pred,
                     RocEncoding::kFloat);
      const PoseEstimate est = estimate_relative_pose(pred, query, roc.transform, opt);
      e["ok"] = true;
      e.update(estimate_json(est));
      const Pose object_pose = object_pose_in_query(est.pose, ref.world_pose);
      e["object_pose"] = pose_to_json(object_pose);
      e["error"] = error_json(est.pose, gt);
      if (!first_ok) first_ok = object_pose;
    } catch (const Error &err) {
      e["ok"] = false;
      e["failure"] = err.what();
      if (!first_error) first_error = err;
    }
    seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    estimates.push_back(std::move(e));
  }
  if (!first_ok) throw *first_error;
  out["estimates"] = estimates;
  out["frames"] = json::array({{{"frame_index", qi}, {"object_pose", pose_to_json(*first_ok)}}});
  if (!c.no_timing) out["timing"] = {{"total_seconds", seconds}};
  emit(out, c.out);

  for (const auto &e : estimates) {
    std::cerr << "ref " << e["reference_index"] << " -> query " << qi << ": ";
    if (e["ok"])
      std::cerr << "rot err " << fmt(e["error"]["rot_deg"].get<double>(), 6) << " deg, trans err "
                << fmt(e["error"]["trans_m"].get<double>(), 6) << " m, " << e["inlier_count"]
                << " pairs\n";
    else
      std::cerr << "failed: " << e["failure"].get<std::string>() << "\n";
  }
  return kOk;
}

struct TrackArgs {
  std::string bundle;
  SolverFlags solver;
  CorruptionFlags corruption;
};

int cmd_track(const TrackArgs &a, const Common &c) {
  const auto seed = resolve_seed(c.seed);
  const SceneBundle b = open_bundle(a.bundle);
  const CorruptionConfig corruption = a.corruption.resolve(seed.value);
  TrackOptions opt;
  opt.estimate = a.solver.resolve(seed.value, 1);
  opt.jobs = c.jobs;
  const TrackRun run = track_sequence(b, corruption, opt);
  const TrackSummary s = summarize_track(run, b);

  json config = a.solver.config();
  config["bundle"] = a.bundle;
  config["corruption"] = to_json(corruption);
  json out = header("track", seed, config);
  out["object_id"] = b.object_id;
  out["reference_index"] = run.reference_index;
  json frames = json::array();
  for (const auto &f : run.frames) {
    json j = {{"frame_index", f.frame_index}};
    if (f.estimate) {
      j.update(estimate_json(*f.estimate));
      j["object_pose"] = pose_to_json(
          object_pose_in_query(f.estimate->pose, b.frames.at(run.reference_index).world_pose));
    } else {
      j["object_pose"] = nullptr;
      j["failure"] = f.failure;
    }
    if (!c.no_timing) j["seconds"] = f.seconds;
    frames.push_back(std::move(j));
  }
  out["frames"] = frames;
  out["metrics"] = roc_pose::to_json(s.report);
  out["miss_rate"] = s.miss_rate;
  if (!c.no_timing) out["timing"] = {{"mean_frame_seconds", s.mean_frame_seconds}};
  emit(out, c.out);

  const auto &ag = s.report.aggregates;
  std::cerr << b.object_id << ": " << run.frames.size() << " frames, ADD-S AUC "
            << fmt(ag.adds_auc) << ", ADD AUC " << fmt(ag.add_auc) << ", miss rate "
            << fmt(s.miss_rate) << "%\n";
  return kOk;
}

struct VoteArgs {
  std::string bundle, estimates;
};

int cmd_vote(const VoteArgs &a, const Common &c) {
  const auto seed = resolve_seed(c.seed);
  const SceneBundle b = open_bundle(a.bundle);
  if (a.estimates.empty()) throw Error(ErrorKind::kInvalidArgument, "--estimates is required");
  const json in = read_json_file(a.estimates, "--estimates");
  int qi = 0;
  ReferenceSet refs;
  std::vector<int> ref_indices;
  try {
    qi = in.at("query_index").get<int>();
    for (const auto &e : in.at("estimates")) {
      if (!e.value("ok", true)) continue;
      const int ri = e.at("reference_index").get<int>();
      refs.frames.push_back(frame_at(b, ri, "--estimates"));
      refs.candidate_estimates.push_back(estimate_from_json(e, "--estimates"));
      ref_indices.push_back(ri);
    }
  } catch (const json::exception &e) {
    throw Error(ErrorKind::kFormat, "--estimates: " + a.estimates + ": " + e.what());
  }
  if (refs.frames.empty())
    throw Error(ErrorKind::kInvalidArgument, "--estimates: no successful estimates to vote on");
  const SceneFrame &query = frame_at(b, qi, "--estimates query_index");
  const VoteResult r = vote(query, refs, c.jobs);
  const BestView oracle = best_view_oracle(refs, query.world_pose, b.model);

  json config = {{"bundle", a.bundle}, {"estimates", a.estimates}};
  json out = header("vote", seed, config);
  out["query_index"] = qi;
  out["reference_indices"] = ref_indices;
  out["chosen_reference"] = ref_indices[r.chosen_index];
  out["chosen_index"] = r.chosen_index;
  out["degenerate"] = r.degenerate;
  out["iou_scores"] = r.iou_scores;
  out["per_view_iou"] = r.per_view_iou;
  out["world_pose"] = pose_to_json(r.world_pose);
  out["voted_add_m"] = add_distance(b.model, r.world_pose, query.world_pose);
  out["best_view_oracle"] = {{"chosen_reference", ref_indices[oracle.index]},
                             {"chosen_index", oracle.index},
                             {"add_m", oracle.add}};
  out["frames"] = json::array({{{"frame_index", qi}, {"object_pose", pose_to_json(r.world_pose)}}});
  emit(out, c.out);
  std::cerr << "vote picked reference " << ref_indices[r.chosen_index] << " (mean IoU "
            << fmt(r.iou_scores[r.chosen_index], 4) << "); oracle picks "
            << ref_indices[oracle.index] << "\n";
  return kOk;
}

struct EvalArgs {
  std::string bundle, input, format = "json";
  int bins = 0;
  double auc_max = 0.10;
};

int cmd_eval(const EvalArgs &a, const Common &c) {
  const auto seed = resolve_seed(c.seed);
  const SceneBundle b = open_bundle(a.bundle);
  if (a.input.empty()) throw Error(ErrorKind::kInvalidArgument, "--input is required");
  const json in = read_json_file(a.input, "--input");
  MetricReport report;
  try {
    for (const auto &f : in.at("frames")) {
      const int idx = f.at("frame_index").get<int>();
      const SceneFrame &frame = frame_at(b, idx, "--input frame_index");
      std::optional<Pose> est;
      if (!f.at("object_pose").is_null()) est = pose_from_json(f.at("object_pose"));
      FrameMetrics m = evaluate_frame(b.model, est, frame.world_pose, b.intrinsics);
      m.object_id = b.object_id;
      m.frame_index = idx;
      report.per_frame.push_back(m);
    }
  } catch (const json::exception &e) {
    throw Error(ErrorKind::kFormat, "--input: " + a.input + ": " + e.what());
  }
  if (report.per_frame.empty())
    throw Error(ErrorKind::kInvalidArgument, "--input: " + a.input + " lists no frames");
  MetricOptions mo;
  mo.auc_bins = a.bins;
  mo.auc_max_threshold = a.auc_max;
  report.aggregates = aggregate(report.per_frame, b.model.diameter, b.intrinsics, mo);

  if (a.format == "csv") {
    emit_text(to_csv(report), c.out);
  } else {
    json config = {{"bundle", a.bundle}, {"input", a.input}, {"bins", a.bins},
                   {"auc_max_threshold", a.auc_max}};
    json out = header("eval", seed, config);
    out["object_id"] = b.object_id;
    out["diameter_m"] = b.model.diameter;
    out["metrics"] = roc_pose::to_json(report);
    emit(out, c.out);
  }
  const auto &ag = report.aggregates;
  std::cerr << b.object_id << ": ADD-S AUC " << fmt(ag.adds_auc) << ", ADD AUC "
            << fmt(ag.add_auc) << ", ADD(-S) 0.1d " << fmt(ag.adds_01d_recall) << "/"
            << fmt(ag.add_01d_recall) << ", AR(MSSD,MSPD) " << fmt(ag.ar_partial.ar) << "\n";
  return kOk;
}

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out_dir;
  double auc_max = 0.10;
};

int cmd_report(const ReportArgs &a, const Common &c) {
  const auto seed = resolve_seed(c.seed);
  if (a.out_dir.empty()) throw Error(ErrorKind::kInvalidArgument, "--out-dir is required");
  std::map<std::string, std::vector<FrameMetrics>> by_object;
  for (const auto &path : a.inputs) {
    const json in = read_json_file(path, "--input");
    try {
      for (const auto &f : in.at("metrics").at("per_frame")) {
        FrameMetrics m = frame_metrics_from_json(f);
        by_object[m.object_id].push_back(m);
      }
    } catch (const json::exception &e) {
      throw Error(ErrorKind::kFormat, "--input: " + path + ": " + e.what());
    }
  }
  if (by_object.empty()) throw Error(ErrorKind::kInvalidArgument, "--input: no frames");
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "--out-dir: cannot create " + a.out_dir);

  std::ostringstream table;
  table << "| object | frames | ADD-S AUC | ADD AUC | miss rate |\n"
        << "|---|---:|---:|---:|---:|\n";
  json rows = json::array();
  std::vector<double> all_add, all_adds;
  auto write_svg = [&](const std::string &name, const std::vector<double> &add,
                       const std::vector<double> &adds, const std::string &title) {
    std::ofstream f(fs::path(a.out_dir) / name, std::ios::binary);
    if (!f) throw Error(ErrorKind::kIo, "cannot write " + (fs::path(a.out_dir) / name).string());
    f << accuracy_curve_svg(add, adds, a.auc_max, title);
  };
  double sum_adds = 0, sum_add = 0;
  for (const auto &[object, frames] : by_object) {
    std::vector<double> add, adds;
    std::size_t misses = 0;
    for (const auto &f : frames) {
      add.push_back(f.add_m);
      adds.push_back(f.adds_m);
      misses += f.miss;
    }
    all_add.insert(all_add.end(), add.begin(), add.end());
    all_adds.insert(all_adds.end(), adds.begin(), adds.end());
    const double add_auc = auc(add, a.auc_max), adds_auc = auc(adds, a.auc_max);
    const double miss = 100.0 * double(misses) / double(frames.size());
    sum_add += add_auc;
    sum_adds += adds_auc;
    table << "| " << object << " | " << frames.size() << " | " << fmt(adds_auc, 1) << " | "
          << fmt(add_auc, 1) << " | " << fmt(miss, 1) << "% |\n";
    rows.push_back({{"object_id", object},
                    {"frames", frames.size()},
                    {"adds_auc", adds_auc},
                    {"add_auc", add_auc},
                    {"miss_rate", miss}});
    write_svg("accuracy_" + object + ".svg", add, adds, "accuracy vs threshold: " + object);
  }
  const double n = double(by_object.size());
  table << "| mean | " << all_add.size() << " | " << fmt(sum_adds / n, 1) << " | "
        << fmt(sum_add / n, 1) << " | |\n";
  write_svg("accuracy_all.svg", all_add, all_adds, "accuracy vs threshold: all objects");
  emit_text(table.str(), (fs::path(a.out_dir) / "report.md").string());

  json config = {{"inputs", a.inputs}, {"auc_max_threshold", a.auc_max}};
  json out = header("report", seed, config);
  out["objects"] = rows;
  out["mean"] = {{"adds_auc", sum_adds / n}, {"add_auc", sum_add / n}};
  emit(out, c.out.empty() ? (fs::path(a.out_dir) / "report.json").string() : c.out);
  std::cerr << table.str();
  return kOk;
}

void add_common(CLI::App *app, Common &c, bool jobs, bool out_required_note = false) {
  app->add_option("--seed", c.seed, "Seed (falls back to ROC_POSE_SEED, then 0)");
  app->add_option("--out", c.out,
                  out_required_note ? "Output directory" : "Output file (stdout if omitted)");
  if (jobs) app->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app->add_flag("--no-timing", c.no_timing, "Omit timing fields");
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"roc_pose: relative object pose from reference object coordinates"};
  app.set_version_flag("--version", ROC_POSE_VERSION);
  app.require_subcommand(1);

  Common common;

  GenerateArgs gen;
  auto *g = app.add_subcommand("generate", "Render a synthetic orbit bundle");
  g->add_option("--kind", gen.kind, "box, cylinder, lshape or blob")
      ->check(CLI::IsMember({"box", "cylinder", "lshape", "blob"}));
  g->add_option("--frames", gen.frames, "Number of frames")->check(CLI::PositiveNumber);
  g->add_option("--gap-deg", gen.gap_deg, "Rotation of the last frame from frame 0");
  g->add_option("--translation-gap", gen.translation_gap, "Camera shift of the last frame (m)");
  g->add_option("--occlusion", gen.occlusion, "Mask fraction carved from frames 1..N-1");
  g->add_option("--noise", gen.noise, "Depth noise sigma (m)");
  g->add_option("--size", gen.size, "Object size (m)");
  g->add_option("--samples,--model-samples", gen.samples, "Model vertices for ADD/ADD-S");
  g->add_flag("--no-rgb", gen.no_rgb, "Skip rgb_%04d.ppm");
  add_common(g, common, false, true);

  EstimateArgs est;
  auto *e = app.add_subcommand("estimate", "Estimate the query pose against reference views");
  e->add_option("--bundle", est.bundle, "Bundle directory")->required();
  e->add_option("--ref", est.refs, "Reference frame index (repeatable, default 0)");
  e->add_option("--query", est.query, "Query frame index (default last)");
  e->add_option("--save-roc", est.roc_out, "Directory for predicted ROC maps");
  est.solver.add(e);
  est.corruption.add(e);
  add_common(e, common, true);

  TrackArgs trk;
  auto *t = app.add_subcommand("track", "Track every frame against frame 0");
  t->add_option("--bundle", trk.bundle, "Bundle directory")->required();
  trk.solver.add(t);
  trk.corruption.add(t);
  add_common(t, common, true);

  VoteArgs vt;
  auto *v = app.add_subcommand("vote", "Pick among per-reference estimates by mask IoU");
  v->add_option("--bundle", vt.bundle, "Bundle directory")->required();
  v->add_option("--estimates", vt.estimates, "Output of estimate")->required();
  add_common(v, common, true);

  EvalArgs ev;
  auto *m = app.add_subcommand("eval", "Score poses against bundle ground truth");
  m->add_option("--bundle", ev.bundle, "Bundle directory")->required();
  m->add_option("--input", ev.input, "JSON with a frames list")->required();
  m->add_option("--format", ev.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  m->add_option("--bins", ev.bins, "Binned AUC with N bins (0 = exact)")
      ->check(CLI::NonNegativeNumber);
  m->add_option("--auc-max", ev.auc_max, "AUC max threshold (m)")->check(CLI::PositiveNumber);
  add_common(m, common, false);

  ReportArgs rp;
  auto *r = app.add_subcommand("report", "Per-object tables and accuracy curves");
  r->add_option("--input", rp.inputs, "eval output (repeatable)")->required();
  r->add_option("--out-dir", rp.out_dir, "Directory for report.md and SVG plots")->required();
  r->add_option("--auc-max", rp.auc_max, "AUC max threshold (m)")->check(CLI::PositiveNumber);
  add_common(r, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*g) return cmd_generate(gen, common);
    if (*e) return cmd_estimate(est, common);
    if (*t) return cmd_track(trk, common);
    if (*v) return cmd_vote(vt, common);
    if (*m) return cmd_eval(ev, common);
    if (*r) return cmd_report(rp, common);
  } catch (const Error &err) {
    std::cerr << "error: " << err.what() << "\n";
    return exit_code_for(err.kind());
  } catch (const std::exception &err) {
    std::cerr << "error: " << err.what() << "\n";
    return kNumericError;
  }
  return kUsage;
}
