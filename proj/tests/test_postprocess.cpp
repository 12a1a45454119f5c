// Copyright (c) 2026 The rotext authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "rotext/error.hpp"
#include "rotext/postprocess.hpp"
#include "support/oracles.hpp"

using namespace rotext;

namespace {

LevelLogits quiet_level(Level level, std::size_t h, std::size_t w) {
  LevelLogits lv;
  lv.spec = LevelSpec{level, stride_of(level), h, w};
  lv.objectness.assign(h * w, -40.0);
  lv.regression.assign(5 * h * w, 0.0);
  return lv;
}

double logit(double p) { return std::log(p / (1.0 - p)); }

ProbSeq one_hot(std::initializer_list<std::size_t> classes, std::size_t C) {
  ProbSeq seq;
  seq.timesteps = classes.size();
  seq.num_classes = C;
  seq.p.assign(seq.timesteps * C, 0.0);
  std::size_t t = 0;
  for (std::size_t c : classes) seq.at(t++, c) = 1.0;
  return seq;
}

}  // namespace

TEST_CASE("logistic basics") {
  CHECK(logistic(0.0) == doctest::Approx(0.5));
  CHECK(logistic(40.0) == doctest::Approx(1.0));
  CHECK(logistic(-40.0) == doctest::Approx(0.0));
  CHECK(logistic(2.0) > logistic(1.0));
  CHECK(std::isfinite(logistic(-1000.0)));
  CHECK(std::isfinite(logistic(1000.0)));
}

TEST_CASE("decode_proposals: zero logits give the canonical box") {
  LevelLogits lv = quiet_level(Level::P2, 2, 2);
  lv.objectness[3] = 3.0;  // cell (1,1), center (6,6)
  FilterConfig cfg;
  std::vector<LevelLogits> maps{lv};
  std::vector<Proposal> props = decode_proposals(maps, cfg);
  REQUIRE(props.size() == 1);
  CHECK(props[0].score == doctest::Approx(logistic(3.0)));
  CHECK(props[0].level == Level::P2);
  CHECK(props[0].cell_row == 1);
  CHECK(props[0].cell_col == 1);
  // Symmetric 0.5*base edge distances: a 640x640 box at the cell center,
  // angle at the middle of the canonical range.
  CHECK(props[0].box.cx == doctest::Approx(6.0));
  CHECK(props[0].box.cy == doctest::Approx(6.0));
  CHECK(props[0].box.w == doctest::Approx(640.0));
  CHECK(props[0].box.h == doctest::Approx(640.0));
  CHECK(props[0].box.theta == doctest::Approx(kPi / 4));
}

TEST_CASE("decode_proposals: the score gate is strict") {
  LevelLogits lv = quiet_level(Level::P2, 1, 2);
  lv.objectness[0] = 0.0;     // exactly the 0.5 threshold: dropped
  lv.objectness[1] = 1e-3;    // just above: kept
  std::vector<LevelLogits> maps{lv};
  std::vector<Proposal> props = decode_proposals(maps, FilterConfig{});
  REQUIRE(props.size() == 1);
  CHECK(props[0].cell_col == 1);
}

TEST_CASE("decode_proposals: silent maps decode to nothing") {
  std::vector<LevelLogits> maps{quiet_level(Level::P2, 4, 4),
                                quiet_level(Level::P3, 2, 2)};
  CHECK(decode_proposals(maps, FilterConfig{}).empty());
}

TEST_CASE("decode_proposals: top-k keeps the best cells in cell order") {
  LevelLogits lv = quiet_level(Level::P2, 3, 3);
  for (std::size_t i = 0; i < 9; ++i)
    lv.objectness[i] = 0.1 * static_cast<double>(i + 1);
  FilterConfig cfg;
  cfg.topk = 4;
  std::vector<LevelLogits> maps{lv};
  std::vector<Proposal> props = decode_proposals(maps, cfg);
  REQUIRE(props.size() == 4);
  // Cells 5..8 carry the largest logits; output stays in cell order.
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(props[k].cell_row == (k + 5) / 3);
    CHECK(props[k].cell_col == (k + 5) % 3);
  }
  // Proposal count never exceeds the live cells.
  cfg.topk = 1000;
  CHECK(decode_proposals(maps, cfg).size() == 9);
}

TEST_CASE("decode_proposals: levels merge in pyramid order") {
  LevelLogits p2 = quiet_level(Level::P2, 2, 2);
  LevelLogits p4 = quiet_level(Level::P4, 2, 2);
  p2.objectness[0] = 1.0;
  p4.objectness[3] = 5.0;
  std::vector<LevelLogits> maps{p2, p4};
  std::vector<Proposal> props = decode_proposals(maps, FilterConfig{});
  REQUIRE(props.size() == 2);
  CHECK(props[0].level == Level::P2);
  CHECK(props[1].level == Level::P4);
  // Stride scales the cell centers.
  CHECK(props[1].box.cx == doctest::Approx((1 + 0.5) * 16));
}

TEST_CASE("decode_proposals validates shapes and config") {
  LevelLogits lv = quiet_level(Level::P2, 2, 2);
  lv.objectness.pop_back();
  std::vector<LevelLogits> maps{lv};
  CHECK_THROWS_AS(decode_proposals(maps, FilterConfig{}), Error);
  FilterConfig bad;
  bad.nms_iou = 1.5;
  std::vector<LevelLogits> ok{quiet_level(Level::P2, 2, 2)};
  CHECK_THROWS_AS(decode_proposals(ok, bad), Error);
}

TEST_CASE("rotated_nms suppresses duplicates, keeps the best") {
  std::vector<RBox> boxes{make_rbox(50, 50, 20, 10, 0.2),
                          make_rbox(50, 50, 20, 10, 0.2),
                          make_rbox(200, 200, 20, 10, 0.0)};
  std::vector<double> scores{0.8, 0.9, 0.5};
  std::vector<std::size_t> kept = rotated_nms(boxes, scores, 0.3);
  CHECK(kept == std::vector<std::size_t>{1, 2});

  // Equal scores tie-break on the lower index.
  scores = {0.8, 0.8, 0.5};
  kept = rotated_nms(boxes, scores, 0.3);
  CHECK(kept == std::vector<std::size_t>{0, 2});
}

TEST_CASE("rotated_nms matches the reference implementation") {
  oracle::Rng rng(51);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 1 + rng.next() % 40;
    std::vector<RBox> boxes;
    std::vector<double> scores;
    for (std::size_t i = 0; i < n; ++i) {
      boxes.push_back(oracle::random_box(rng, 50, 150, 20, 80));
      scores.push_back(rng.uniform(0, 1));
    }
    double thresh = rng.uniform(0.1, 0.7);
    std::vector<std::size_t> got = rotated_nms(boxes, scores, thresh);
    std::vector<std::size_t> want = oracle::naive_nms(boxes, scores, thresh);
    CHECK(got == want);

    // Idempotence: suppressing the survivors changes nothing.
    std::vector<RBox> kept_boxes;
    std::vector<double> kept_scores;
    for (std::size_t i : got) {
      kept_boxes.push_back(boxes[i]);
      kept_scores.push_back(scores[i]);
    }
    std::vector<std::size_t> again =
        rotated_nms(kept_boxes, kept_scores, thresh);
    CHECK(again.size() == got.size());
  }
}

TEST_CASE("refine matches the shared box decoding") {
  RBox p = make_rbox(100, 80, 40, 20, 0.3);
  RegressionTarget v{0.1, -0.2, 0.05, 0.0, 0.1};
  RBox a = refine(p, v);
  RBox b = decode_target(p, v);
  CHECK(a.cx == b.cx);
  CHECK(a.cy == b.cy);
  CHECK(a.w == b.w);
  CHECK(a.theta == b.theta);
  RBox same = refine(p, RegressionTarget{});
  CHECK(same.cx == doctest::Approx(p.cx));
  CHECK(same.w == doctest::Approx(p.w));
}

TEST_CASE("rec_score averages the row maxima") {
  ProbSeq seq{2, 2, {0.9, 0.1, 0.3, 0.7}};
  CHECK(rec_score(seq) == doctest::Approx(0.8));
  ProbSeq uniform{3, 4, std::vector<double>(12, 0.25)};
  CHECK(rec_score(uniform) == doctest::Approx(0.25));
  CHECK(rec_score(one_hot({0, 1}, 2)) == doctest::Approx(1.0));
  ProbSeq empty{0, 2, {}};
  CHECK_THROWS_AS(rec_score(empty), Error);
  ProbSeq bad{1, 2, {0.9, 0.3}};
  CHECK_THROWS_AS(rec_score(bad), Error);
}

TEST_CASE("greedy_decode collapses repeats and drops blanks") {
  // Classes: a=0, b=1, blank=2.
  CHECK(greedy_decode(one_hot({0, 0, 2, 1}, 3), "ab") == "ab");
  CHECK(greedy_decode(one_hot({0, 2, 0}, 3), "ab") == "aa");
  CHECK(greedy_decode(one_hot({2, 2, 2}, 3), "ab").empty());
  CHECK(greedy_decode(one_hot({1, 1, 1}, 3), "ab") == "b");
  // Argmax ties pick the lowest class.
  ProbSeq tie{1, 2, {0.5, 0.5}};
  CHECK(greedy_decode(tie, "a") == "a");
  CHECK_THROWS_AS(greedy_decode(tie, "ab"), Error);  // alphabet mismatch
}

TEST_CASE("joint_filter: union of the two score gates, strict") {
  FilterConfig cfg;  // t_d 0.7, t_r 0.8
  std::vector<Detection> dets{
      {make_rbox(0, 0, 1, 1, 0), 0.9, 0.1, "strong det"},
      {make_rbox(0, 0, 1, 1, 0), 0.5, 0.9, "rescued by recognition"},
      {make_rbox(0, 0, 1, 1, 0), 0.5, 0.5, "dropped"},
      {make_rbox(0, 0, 1, 1, 0), 0.7, 0.8, "boundary dropped"},
  };
  std::vector<Detection> kept = joint_filter(dets, cfg);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].transcript == "strong det");
  CHECK(kept[1].transcript == "rescued by recognition");
}

TEST_CASE("joint_filter matches brute force and is monotone") {
  oracle::Rng rng(52);
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t n = rng.next() % 30;
    std::vector<Detection> dets;
    for (std::size_t i = 0; i < n; ++i)
      dets.push_back(Detection{make_rbox(1, 1, 1, 1, 0), rng.uniform(0, 1),
                               rng.uniform(0, 1), std::to_string(i)});
    FilterConfig cfg;
    cfg.t_d = rng.uniform(0.2, 0.9);
    cfg.t_r = rng.uniform(0.2, 0.9);
    std::vector<Detection> kept = joint_filter(dets, cfg);

    std::set<std::string> want;
    for (const Detection& d : dets)
      if (d.s_r > cfg.t_r || d.s_d > cfg.t_d) want.insert(d.transcript);
    CHECK(kept.size() == want.size());
    for (const Detection& d : kept) CHECK(want.count(d.transcript) == 1);
    for (std::size_t i = 1; i < kept.size(); ++i)
      CHECK(kept[i - 1].s_d >= kept[i].s_d);

    // Raising both thresholds can only shrink the kept set.
    FilterConfig tighter = cfg;
    tighter.t_d = std::min(1.0, cfg.t_d + 0.2);
    tighter.t_r = std::min(1.0, cfg.t_r + 0.2);
    std::vector<Detection> fewer = joint_filter(dets, tighter);
    std::set<std::string> kept_ids;
    for (const Detection& d : kept) kept_ids.insert(d.transcript);
    for (const Detection& d : fewer) CHECK(kept_ids.count(d.transcript) == 1);
  }
}

TEST_CASE("infer_pipeline runs end to end with a recognizing stage") {
  // Two live cells far apart; regression logits shape 20x20 boxes so NMS
  // keeps both.
  LevelLogits lv = quiet_level(Level::P2, 8, 8);
  std::size_t cells = 64;
  auto arm = [&](std::size_t row, std::size_t col, double score_logit) {
    std::size_t idx = row * 8 + col;
    lv.objectness[idx] = score_logit;
    for (int c = 0; c < 4; ++c)
      lv.regression[static_cast<std::size_t>(c) * cells + idx] =
          logit(10.0 / 640.0);
    lv.regression[4 * cells + idx] = logit(0.25);  // theta = 0
  };
  arm(1, 1, 3.0);   // center (6, 6)
  arm(6, 6, 2.0);   // center (26, 26)

  FilterConfig cfg;
  cfg.t_d = 0.5;
  // Provider: identity refinement, detection score from the first stage,
  // one-hot recognition of "ab" (classes a=0, b=1, blank=2).
  SecondStageProvider provider = [](std::size_t, const Proposal& p) {
    SecondStageOutput out;
    out.s_d = p.score;
    out.seq = one_hot({0, 2, 1}, 3);
    return out;
  };
  std::vector<LevelLogits> maps{lv};
  std::vector<Detection> dets = infer_pipeline(maps, provider, cfg, "ab");
  REQUIRE(dets.size() == 2);
  CHECK(dets[0].s_d == doctest::Approx(logistic(3.0)));
  CHECK(dets[1].s_d == doctest::Approx(logistic(2.0)));
  CHECK(dets[0].box.cx == doctest::Approx(6.0).epsilon(1e-6));
  CHECK(dets[1].box.cx == doctest::Approx(26.0).epsilon(1e-6));
  CHECK(dets[0].box.w == doctest::Approx(20.0).epsilon(1e-6));
  CHECK(dets[0].transcript == "ab");
  CHECK(dets[0].s_r == doctest::Approx(1.0));

  // The result is independent of the worker count, field for field.
  std::vector<Detection> dets8 = infer_pipeline(maps, provider, cfg, "ab", 8);
  REQUIRE(dets8.size() == dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    CHECK(dets8[i].box.cx == dets[i].box.cx);
    CHECK(dets8[i].s_d == dets[i].s_d);
    CHECK(dets8[i].s_r == dets[i].s_r);
    CHECK(dets8[i].transcript == dets[i].transcript);
  }
}

TEST_CASE("infer_pipeline: detection-only provider and gating") {
  LevelLogits lv = quiet_level(Level::P2, 4, 4);
  lv.objectness[5] = 3.0;
  std::vector<LevelLogits> maps{lv};

  // Empty recognition sequence: s_r stays 0, the transcript stays empty,
  // and only the detection gate can keep the box.
  SecondStageProvider weak = [](std::size_t, const Proposal&) {
    SecondStageOutput out;
    out.s_d = 0.65;
    return out;
  };
  FilterConfig cfg;  // t_d = 0.7
  CHECK(infer_pipeline(maps, weak, cfg, "ab").empty());

  SecondStageProvider strong = [](std::size_t, const Proposal&) {
    SecondStageOutput out;
    out.s_d = 0.9;
    return out;
  };
  std::vector<Detection> dets = infer_pipeline(maps, strong, cfg, "ab");
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].s_r == 0.0);
  CHECK(dets[0].transcript.empty());

  // Provider contract violations surface as errors.
  SecondStageProvider bad = [](std::size_t, const Proposal&) {
    SecondStageOutput out;
    out.s_d = 1.5;
    return out;
  };
  CHECK_THROWS_AS(infer_pipeline(maps, bad, cfg, "ab"), Error);
}
