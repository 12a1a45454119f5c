// Copyright (c) 2026 The rotext authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "rotext/error.hpp"
#include "rotext/icdar.hpp"
#include "rotext/manifest.hpp"
#include "rotext/tensor_io.hpp"
#include "support/oracles.hpp"

using namespace rotext;
namespace fs = std::filesystem;

namespace {

// Scratch directory, removed when the test ends.
struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("rotext_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Status status_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.status();
  }
  return Status::Ok;
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("tensor round trip is bit exact") {
  TempDir dir;
  oracle::Rng rng(71);
  Tensor t;
  t.dims = {2, 3, 4};
  t.data.resize(24);
  for (float& v : t.data) v = static_cast<float>(rng.uniform(-100, 100));
  t.data[0] = 0.0f;
  t.data[1] = -0.0f;
  t.data[2] = 1e-38f;

  std::string path = dir.file("t.rten");
  write_tensor(path, t);
  Tensor back = read_tensor(path);
  CHECK(back.dims == t.dims);
  REQUIRE(back.data.size() == t.data.size());
  CHECK(std::memcmp(back.data.data(), t.data.data(),
                    4 * t.data.size()) == 0);

  // 1-d tensors round trip too.
  Tensor one;
  one.dims = {5};
  one.data = {1, 2, 3, 4, 5};
  write_tensor(dir.file("one.rten"), one);
  CHECK(read_tensor(dir.file("one.rten")).data == one.data);
}

TEST_CASE("tensor reader pins down malformed files") {
  TempDir dir;
  std::string missing = dir.file("absent.rten");
  CHECK(status_of([&] { read_tensor(missing); }) == Status::Io);

  Tensor t;
  t.dims = {2, 2};
  t.data = {1, 2, 3, 4};
  std::string good_path = dir.file("good.rten");
  write_tensor(good_path, t);
  std::string good = read_bytes(good_path);

  // Corrupt magic: named with its offset.
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  write_bytes(dir.file("magic.rten"), bad_magic);
  std::string msg =
      message_of([&] { read_tensor(dir.file("magic.rten")); });
  CHECK(msg.find("magic") != std::string::npos);
  CHECK(msg.find("byte 0") != std::string::npos);
  CHECK(status_of([&] { read_tensor(dir.file("magic.rten")); }) ==
        Status::Parse);

  // Unsupported version at byte 4.
  std::string bad_version = good;
  bad_version[4] = 9;
  write_bytes(dir.file("version.rten"), bad_version);
  msg = message_of([&] { read_tensor(dir.file("version.rten")); });
  CHECK(msg.find("version") != std::string::npos);
  CHECK(msg.find("byte 4") != std::string::npos);

  // Truncated payload: the error names the payload offset (20 here).
  std::string truncated = good.substr(0, good.size() - 6);
  write_bytes(dir.file("trunc.rten"), truncated);
  msg = message_of([&] { read_tensor(dir.file("trunc.rten")); });
  CHECK(msg.find("truncated payload") != std::string::npos);
  CHECK(msg.find("byte 20") != std::string::npos);

  // Trailing garbage after the payload.
  std::string trailing = good + "zz";
  write_bytes(dir.file("trail.rten"), trailing);
  msg = message_of([&] { read_tensor(dir.file("trail.rten")); });
  CHECK(msg.find("trailing") != std::string::npos);

  // Zero dimension.
  std::string zero_dim = good;
  zero_dim[12] = 0;  // first dim u32 -> 0
  write_bytes(dir.file("zero.rten"), zero_dim);
  msg = message_of([&] { read_tensor(dir.file("zero.rten")); });
  CHECK(msg.find("zero dimension") != std::string::npos);

  // Rank outside [1,8].
  std::string bad_rank = good;
  bad_rank[8] = 0;
  write_bytes(dir.file("rank.rten"), bad_rank);
  CHECK(status_of([&] { read_tensor(dir.file("rank.rten")); }) ==
        Status::Parse);
}

TEST_CASE("tensor writer validates its input") {
  TempDir dir;
  Tensor bad;
  bad.dims = {2, 3};
  bad.data = {1, 2, 3};  // 6 expected
  CHECK(status_of([&] { write_tensor(dir.file("x.rten"), bad); }) ==
        Status::InvalidArgument);
  Tensor no_dims;
  no_dims.data = {1};
  CHECK(status_of([&] { write_tensor(dir.file("y.rten"), no_dims); }) ==
        Status::InvalidArgument);
}

TEST_CASE("min_area_rect recovers rectangles from their vertices") {
  oracle::Rng rng(72);
  for (int trial = 0; trial < 200; ++trial) {
    RBox box = oracle::random_box(rng);
    Quad q = box_vertices(box);
    RBox back = min_area_rect(q);
    // The recovered rectangle may swap w/h with a quarter-turn; compare
    // geometry, not tuples.
    CHECK(rotated_iou(box, back) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(back.w * back.h == doctest::Approx(box.w * box.h).epsilon(1e-9));
  }
}

TEST_CASE("min_area_rect shrinks to the hull, rejects collinear input") {
  // A rectangle plus an interior point changes nothing.
  RBox box = make_rbox(10, 10, 8, 4, 0.5);
  Quad q = box_vertices(box);
  std::vector<Vec2> pts(q.begin(), q.end());
  pts.push_back(Vec2{10, 10});
  RBox same = min_area_rect(pts);
  CHECK(rotated_iou(box, same) == doctest::Approx(1.0).epsilon(1e-6));

  // A diamond's min-area rectangle is the rotated square, not the AABB.
  std::vector<Vec2> diamond{{0, -1}, {1, 0}, {0, 1}, {-1, 0}};
  RBox d = min_area_rect(diamond);
  CHECK(d.w * d.h == doctest::Approx(2.0).epsilon(1e-9));

  std::vector<Vec2> line{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  CHECK(status_of([&] { min_area_rect(line); }) == Status::Degenerate);
}

TEST_CASE("detection lines format and parse") {
  Detection d;
  d.box = make_rbox(100, 50, 40, 20, 0);
  d.s_d = 0.9125;
  d.s_r = 0.5;
  d.transcript = "hello,world";  // commas survive
  std::string line = format_detection_line(d);
  CHECK(line ==
        "80.0,40.0,120.0,40.0,120.0,60.0,80.0,60.0,0.9125,0.5000,hello,world");

  Detection back = parse_detection_line(line);
  CHECK(back.s_d == doctest::Approx(0.9125));
  CHECK(back.s_r == doctest::Approx(0.5));
  CHECK(back.transcript == "hello,world");
  CHECK(rotated_iou(back.box, d.box) == doctest::Approx(1.0).epsilon(1e-3));

  // Scores outside [0,1] are rejected.
  CHECK(status_of([&] {
          parse_detection_line("0,0,1,0,1,1,0,1,1.5,0.5,x");
        }) == Status::Parse);
  // Too few fields.
  CHECK(status_of([&] { parse_detection_line("1,2,3"); }) == Status::Parse);
  // Trailing junk in a number.
  CHECK(status_of([&] {
          parse_detection_line("0a,0,1,0,1,1,0,1,0.5,0.5,x");
        }) == Status::Parse);
}

TEST_CASE("ground-truth lines parse with transcripts intact") {
  GroundTruth gt = parse_gt_line("0,0,10,0,10,4,0,4,don't care");
  CHECK(gt.transcript == "don't care");
  CHECK(gt.box.cx == doctest::Approx(5.0));
  CHECK(gt.box.cy == doctest::Approx(2.0));
  CHECK(gt.box.w * gt.box.h == doctest::Approx(40.0).epsilon(1e-9));

  GroundTruth empty = parse_gt_line("0,0,10,0,10,4,0,4,");
  CHECK(empty.transcript.empty());
}

TEST_CASE("det/gt files round trip through disk") {
  TempDir dir;
  std::vector<Detection> dets;
  oracle::Rng rng(73);
  for (int i = 0; i < 5; ++i) {
    Detection d;
    d.box = oracle::random_box(rng);
    d.s_d = rng.uniform(0, 1);
    d.s_r = rng.uniform(0, 1);
    d.transcript = "word" + std::to_string(i);
    dets.push_back(d);
  }
  std::string path = dir.file("dets.txt");
  write_det_file(path, dets);
  std::vector<Detection> back = read_det_file(path);
  REQUIRE(back.size() == dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    CHECK(back[i].transcript == dets[i].transcript);
    // Coordinates were rounded to one decimal; IoU stays near 1.
    CHECK(rotated_iou(back[i].box, dets[i].box) > 0.99);
  }

  // Write again from the parsed copy: the bytes stabilize.
  std::string path2 = dir.file("dets2.txt");
  write_det_file(path2, back);
  std::string path3 = dir.file("dets3.txt");
  write_det_file(path3, read_det_file(path2));
  CHECK(read_bytes(path2) == read_bytes(path3));
}

TEST_CASE("gt reader skips blanks, strips CR, names bad lines") {
  TempDir dir;
  std::string path = dir.file("gt.txt");
  write_bytes(path,
              "0,0,10,0,10,4,0,4,alpha\r\n"
              "\n"
              "20,0,30,0,30,4,20,4,beta\n");
  std::vector<GroundTruth> gts = read_gt_file(path);
  REQUIRE(gts.size() == 2);
  CHECK(gts[0].transcript == "alpha");
  CHECK(gts[1].transcript == "beta");

  write_bytes(path, "0,0,10,0,10,4,0,4,ok\nnot,a,line\n");
  std::string msg = message_of([&] { read_gt_file(path); });
  CHECK(msg.find(":2:") != std::string::npos);  // file:lineno: prefix
  CHECK(status_of([&] { read_gt_file(path); }) == Status::Parse);
  CHECK(status_of([&] { read_gt_file(dir.file("absent.txt")); }) ==
        Status::Io);
}

TEST_CASE("manifest parses, overlays config and resolves paths") {
  TempDir dir;
  Tensor dummy;
  dummy.dims = {1};
  dummy.data = {0.0f};
  write_tensor(dir.file("obj.rten"), dummy);
  write_tensor(dir.file("reg.rten"), dummy);

  std::string manifest = dir.file("run.json");
  write_bytes(manifest, R"({
    "image": {"width": 640, "height": 480},
    "levels": [{"stride": 4, "objectness": "obj.rten", "regression": "reg.rten"}],
    "alphabet": "abc",
    "config": {"t_d": 0.6, "topk": 50, "final_nms": false}
  })");
  RunManifest m = read_manifest(manifest);
  CHECK(m.image_width == 640);
  CHECK(m.image_height == 480);
  REQUIRE(m.levels.size() == 1);
  CHECK(m.levels[0].stride == 4);
  CHECK(m.alphabet == "abc");
  CHECK(m.config.t_d == doctest::Approx(0.6));   // overridden
  CHECK(m.config.t_r == doctest::Approx(0.8));   // default
  CHECK(m.config.topk == 50);
  CHECK(m.config.final_nms == false);
  CHECK(fs::path(m.resolve("obj.rten")) == dir.path / "obj.rten");
  CHECK(!m.second_stage.has_value());
}

TEST_CASE("manifest rejects malformed descriptions") {
  TempDir dir;
  Tensor dummy;
  dummy.dims = {1};
  dummy.data = {0.0f};
  write_tensor(dir.file("obj.rten"), dummy);
  write_tensor(dir.file("reg.rten"), dummy);
  std::string manifest = dir.file("run.json");
  const std::string level =
      R"([{"stride": 4, "objectness": "obj.rten", "regression": "reg.rten"}])";

  auto expect = [&](const std::string& body, Status want,
                    const std::string& needle) {
    write_bytes(manifest, body);
    CHECK(status_of([&] { read_manifest(manifest); }) == want);
    std::string msg = message_of([&] { read_manifest(manifest); });
    CHECK(msg.find(needle) != std::string::npos);
  };

  expect("{invalid json", Status::Parse, "");
  expect(R"({"image": {"width": 640, "height": 480}, "levels": )" + level +
             R"(, "typo_key": 1})",
         Status::Parse, "typo_key");
  expect(R"({"image": {"width": 640, "height": 480}, "levels": []})",
         Status::Parse, "nonempty");
  expect(R"({"image": {"width": 640, "height": 480}, "levels":
           [{"stride": 7, "objectness": "obj.rten", "regression": "reg.rten"}]})",
         Status::Parse, "stride 7");
  expect(R"({"image": {"width": 640, "height": 480}, "levels":
           [{"stride": 4, "objectness": "obj.rten", "regression": "reg.rten"},
            {"stride": 4, "objectness": "obj.rten", "regression": "reg.rten"}]})",
         Status::Parse, "duplicate stride");
  expect(R"({"image": {"width": 0, "height": 480}, "levels": )" + level + "}",
         Status::Parse, "positive");
  expect(R"({"image": {"width": 640, "height": 480}, "levels": )" + level +
             R"(, "config": {"t_d": 1.5}})",
         Status::InvalidArgument, "t_d");
  expect(R"({"image": {"width": 640, "height": 480}, "levels": )" + level +
             R"(, "config": {"bogus": 1}})",
         Status::Parse, "bogus");
  expect(R"({"image": {"width": 640, "height": 480}, "levels":
           [{"stride": 4, "objectness": "missing.rten", "regression": "reg.rten"}]})",
         Status::Io, "missing.rten");
  expect(R"({"image": {"width": 640, "height": 480}, "levels": )" + level +
             R"(, "second_stage": {"regression": "obj.rten",
                 "scores": "obj.rten", "probs": "obj.rten"}})",
         Status::Parse, "alphabet");
}
