#include <gtest/gtest.h>

#include <filesystem>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>

#include "test_support.hpp"

namespace roc_pose {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string &name) {
  const fs::path p = fs::temp_directory_path() / ("roc_pose_test_scenes_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(MakeObject, UnitCubeDiameter) {
  ObjectSpec spec;
  spec.kind = ObjectKind::kBox;
  spec.dims = Vec3(1, 1, 1);
  spec.samples = 200;
  spec.surface_samples = 5000;
  const auto obj = make_object(spec);
  EXPECT_NEAR(obj.model.diameter, std::sqrt(3.0), 1e-9);
  EXPECT_EQ(obj.model.symmetries.size(), 8u);
}

TEST(MakeObject, SameSeedIsBitIdentical) {
  for (auto kind : {ObjectKind::kBox, ObjectKind::kCylinder, ObjectKind::kLShape,
                    ObjectKind::kBlob}) {
    const auto a = make_object(kind, 0.12, 128, 9);
    const auto b = make_object(kind, 0.12, 128, 9);
    EXPECT_EQ(a.model.vertices, b.model.vertices);
    EXPECT_EQ(a.surface, b.surface);
    EXPECT_EQ(a.model.vertices.size(), 128u);
  }
}

TEST(MakeObject, SymmetriesMapModelOntoItself) {
  for (auto kind : {ObjectKind::kBox, ObjectKind::kCylinder}) {
    const auto obj = make_object(kind, 0.15, 1024, 2);
    const auto &m = obj.model;
    for (const auto &sym : m.symmetries) {
      // Symmetric images stay within the (bounding) shape.
      for (const auto &v : m.vertices) {
        const Vec3 w = sym * v;
        EXPECT_LT((w.cwiseAbs() - v.cwiseAbs()).norm() * (kind == ObjectKind::kBox), 1e-12);
        EXPECT_NEAR(w.head<2>().norm(), v.head<2>().norm(), 1e-12);
      }
    }
  }
}

TEST(MakeObject, InvalidSize) {
  EXPECT_THROW(make_object(ObjectKind::kBox, 0.0, 128, 0), Error);
  EXPECT_THROW(make_object(ObjectKind::kBox, -1.0, 128, 0), Error);
  EXPECT_THROW(make_object(ObjectKind::kBox, 0.1, 4, 0), Error);
  EXPECT_EQ(parse_object_kind("lshape"), ObjectKind::kLShape);
  EXPECT_THROW(parse_object_kind("teapot"), Error);
}

TEST(Render, DepthMatchesSurface) {
  const auto obj = make_object(ObjectKind::kBlob, 0.15, 256, 1);
  const auto f = render_frame(obj, look_at(Vec3(0.2, 0.3, -0.4), Vec3::Zero()), default_intrinsics());
  EXPECT_GT(count_nonzero(f.mask), 500u);
  for (std::size_t i = 0; i < f.mask.size(); ++i)
    EXPECT_EQ(f.mask.data()[i] != 0, f.depth.data()[i] > 0.0f);
  // All backprojected points lie close to the object surface in world frame.
  const auto world = transform(invert(f.world_pose), backproject(f).points);
  for (const auto &p : world) EXPECT_LT(p.norm(), 0.11);
}

TEST(Render, BehindCameraThrows) {
  const auto obj = make_object(ObjectKind::kBox, 0.15, 128, 1);
  EXPECT_THROW(render_frame(obj, look_at(Vec3(0, 0, -0.5), Vec3(0, 0, -1)), default_intrinsics()),
               Error);
}

TEST(Render, BackprojectRenderFixedPoint) {
  // Re-splatting the first render's backprojected cloud covers its mask.
  const auto obj = make_object(ObjectKind::kLShape, 0.15, 256, 5);
  const auto k = default_intrinsics();
  const Pose cam = look_at(Vec3(-0.3, 0.2, -0.4), Vec3::Zero());
  const auto first = render_frame(obj, cam, k);
  SyntheticObject resampled = obj;
  resampled.surface = transform(invert(cam), backproject(first).points);
  resampled.normals.assign(resampled.surface.size(), Vec3::UnitZ());
  const auto second = render_frame(resampled, cam, k);
  std::size_t both = 0;
  for (std::size_t i = 0; i < first.mask.size(); ++i)
    both += first.mask.data()[i] && second.mask.data()[i];
  EXPECT_GE(double(both), 0.99 * double(count_nonzero(first.mask)));
}

TEST(MakePair, ZeroGapIsIdentity) {
  const auto obj = make_object(ObjectKind::kBox, 0.15, 128, 1);
  PairSpec spec;
  spec.seed = 3;
  const auto pair = make_pair(obj, spec);
  EXPECT_LT((pair.gt_relative.matrix() - Mat4::Identity()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MakePair, RequestedGap) {
  const auto obj = make_object(ObjectKind::kBox, 0.15, 128, 1);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PairSpec spec;
    spec.rotation_gap_deg = {90, 90};
    spec.seed = seed;
    const auto pair = make_pair(obj, spec);
    const double deg = rotation_angle(pair.gt_relative.rotation) * 180 / std::numbers::pi;
    EXPECT_GE(deg, 89.9);
    EXPECT_LE(deg, 90.1);
  }
}

TEST(MakePair, OcclusionRemovesRequestedArea) {
  const auto obj = make_object(ObjectKind::kBlob, 0.15, 128, 1);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PairSpec spec;
    spec.seed = seed;
    const auto clean = make_pair(obj, spec);
    spec.occlusion = 0.3;
    const auto occluded = make_pair(obj, spec);
    const double before = double(count_nonzero(clean.query.mask));
    const double after = double(count_nonzero(occluded.query.mask));
    EXPECT_NEAR(1.0 - after / before, 0.3, 0.05);
    ASSERT_TRUE(occluded.occluder.has_value());
  }
}

TEST(MakePair, InvalidSpec) {
  const auto obj = make_object(ObjectKind::kBox, 0.15, 128, 1);
  PairSpec spec;
  spec.occlusion = 1.0;
  EXPECT_THROW(make_pair(obj, spec), Error);
  spec = {};
  spec.rotation_gap_deg = {10, 5};
  EXPECT_THROW(make_pair(obj, spec), Error);
}

TEST(ImageIo, PfmRoundTripAndByteOrder) {
  const auto dir = temp_dir("pfm");
  DepthImage d(5, 3, 0.0f);
  for (int v = 0; v < 3; ++v)
    for (int u = 0; u < 5; ++u) d(u, v) = 0.1f * u + v;
  io::write_pfm(dir / "d.pfm", d);
  EXPECT_EQ(io::read_depth_pfm(dir / "d.pfm"), d);
  const std::string bytes = slurp(dir / "d.pfm");
  EXPECT_EQ(bytes.substr(0, 3), "Pf\n");
  EXPECT_NE(bytes.find("-1"), std::string::npos);
  // Rows are stored bottom-to-top: the first stored value is d(0, 2) = 2.
  const std::size_t header = bytes.size() - 15 * 4;
  float first;
  std::memcpy(&first, bytes.data() + header, 4);
  EXPECT_EQ(first, 2.0f);
  fs::remove_all(dir);
}

TEST(ImageIo, TruncatedAndCorruptFilesNameTheFile) {
  const auto dir = temp_dir("bad");
  io::write_pfm(dir / "d.pfm", DepthImage(8, 8, 1.0f));
  const std::string bytes = slurp(dir / "d.pfm");
  std::ofstream(dir / "t.pfm", std::ios::binary) << bytes.substr(0, bytes.size() - 10);
  try {
    io::read_depth_pfm(dir / "t.pfm");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFormat);
    EXPECT_NE(std::string(e.what()).find("t.pfm"), std::string::npos);
  }
  std::ofstream(dir / "x.pgm", std::ios::binary) << "P2\n1 1\n255\n0\n";
  EXPECT_THROW(io::read_pgm_mask(dir / "x.pgm"), Error);
  EXPECT_THROW(io::read_ppm(dir / "missing.ppm"), Error);
  fs::remove_all(dir);
}

TEST(ImageIo, PgmAndPpm) {
  const auto dir = temp_dir("pnm");
  MaskImage m(3, 2, 0);
  m(1, 1) = 1;
  io::write_pgm(dir / "m.pgm", m);
  EXPECT_EQ(io::read_pgm_mask(dir / "m.pgm"), m);
  RgbImage rgb(2, 2, Rgb{1, 2, 3});
  rgb(1, 0) = Rgb{200, 100, 50};
  io::write_ppm(dir / "c.ppm", rgb);
  EXPECT_EQ(io::read_ppm(dir / "c.ppm"), rgb);
  fs::remove_all(dir);
}

TEST(Bundle, SaveLoadSaveIsByteIdentical) {
  const auto dir = temp_dir("bundle");
  OrbitSpec spec;
  spec.frames = 3;
  spec.gap_deg = 30;
  spec.occlusion = 0.2;
  spec.depth_noise = 0.002;
  spec.samples = 128;
  spec.seed = 4;
  const auto b = generate_orbit_bundle(spec);
  save_bundle(b, dir / "a");
  const auto loaded = load_bundle(dir / "a");
  save_bundle(loaded, dir / "b");
  for (const auto &e : fs::directory_iterator(dir / "a"))
    EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / e.path().filename())) << e.path();
  ASSERT_EQ(loaded.frames.size(), 3u);
  EXPECT_EQ(loaded.frames[1].depth, b.frames[1].depth);
  EXPECT_EQ(loaded.frames[2].world_pose.matrix(), b.frames[2].world_pose.matrix());
  EXPECT_EQ(loaded.model.vertices, b.model.vertices);
  fs::remove_all(dir);
}

TEST(Bundle, OrbitGap) {
  OrbitSpec spec;
  spec.frames = 5;
  spec.gap_deg = 40;
  spec.samples = 64;
  spec.rgb = false;
  const auto b = generate_orbit_bundle(spec);
  const Pose rel = relative_pose(b.frames.front(), b.frames.back());
  EXPECT_NEAR(rotation_angle(rel.rotation) * 180 / std::numbers::pi, 40.0, 1e-9);
  EXPECT_FALSE(b.frames[0].rgb.has_value());
}

TEST(Bundle, MissingAndTruncatedFilesNameTheFrame) {
  const auto dir = temp_dir("broken");
  OrbitSpec spec;
  spec.frames = 2;
  spec.samples = 64;
  save_bundle(generate_orbit_bundle(spec), dir);
  const std::string bytes = slurp(dir / "depth_0001.pfm");
  std::ofstream(dir / "depth_0001.pfm", std::ios::binary) << bytes.substr(0, bytes.size() / 2);
  try {
    load_bundle(dir);
    FAIL();
  } catch (const Error &e) {
    EXPECT_NE(std::string(e.what()).find("depth_0001.pfm"), std::string::npos);
  }
  fs::remove(dir / "pose_0000.json");
  try {
    load_bundle(dir);
    FAIL();
  } catch (const Error &e) {
    EXPECT_NE(std::string(e.what()).find("0000"), std::string::npos);
  }
  EXPECT_THROW(load_bundle(dir / "nope"), Error);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace roc_pose
