// Copyright (c) 2026 The rotext authors
// SPDX-License-Identifier: Apache-2.0

#include "rotext/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>

#include "rotext/error.hpp"
#include "rotext/parallel.hpp"

namespace rotext {

void LevelLogits::validate() const {
  if (spec.height < 1 || spec.width < 1)
    fail(Status::InvalidArgument,
         std::string(level_name(spec.level)) + ": empty grid");
  if (spec.stride != stride_of(spec.level))
    fail(Status::InvalidArgument,
         std::string(level_name(spec.level)) + ": stride " +
             std::to_string(spec.stride) + " does not match the level");
  std::size_t cells = spec.height * spec.width;
  if (objectness.size() != cells)
    fail(Status::InvalidArgument,
         std::string(level_name(spec.level)) + ": objectness holds " +
             std::to_string(objectness.size()) + " values, expected " +
             std::to_string(cells));
  if (regression.size() != 5 * cells)
    fail(Status::InvalidArgument,
         std::string(level_name(spec.level)) + ": regression holds " +
             std::to_string(regression.size()) + " values, expected " +
             std::to_string(5 * cells));
}

void FilterConfig::validate() const {
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0))
      fail(Status::InvalidArgument,
           std::string("config: ") + name + " must be in [0,1]");
  };
  unit(t_d, "t_d");
  unit(t_r, "t_r");
  unit(nms_iou, "nms_iou");
  unit(score_thresh, "score_thresh");
  if (!(base_size > 0.0))
    fail(Status::InvalidArgument, "config: base_size must be > 0");
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<Proposal> decode_proposals(std::span<const LevelLogits> maps,
                                       const FilterConfig& cfg) {
  cfg.validate();
  std::vector<Proposal> merged;
  std::vector<Proposal> level_props;
  for (const LevelLogits& lv : maps) {
    lv.validate();
    level_props.clear();
    std::size_t cells = lv.spec.height * lv.spec.width;
    for (std::size_t idx = 0; idx < cells; ++idx) {
      double score = logistic(lv.objectness[idx]);
      if (!(score > cfg.score_thresh)) continue;
      std::size_t row = idx / lv.spec.width;
      std::size_t col = idx % lv.spec.width;
      EdgeDist d;
      d.l = logistic(lv.regression[0 * cells + idx]) * cfg.base_size;
      d.t = logistic(lv.regression[1 * cells + idx]) * cfg.base_size;
      d.r = logistic(lv.regression[2 * cells + idx]) * cfg.base_size;
      d.b = logistic(lv.regression[3 * cells + idx]) * cfg.base_size;
      d.theta = logistic(lv.regression[4 * cells + idx]) * kPi + kAngleLo;
      Vec2 center = cell_center(lv.spec, row, col);
      Proposal p;
      p.box = dist_to_center(d, center.x, center.y);
      p.score = score;
      p.level = lv.spec.level;
      p.cell_row = row;
      p.cell_col = col;
      level_props.push_back(std::move(p));
    }
    if (level_props.size() > cfg.topk) {
      // Keep the top-k by score; cell order breaks ties so the cut is
      // deterministic.
      std::stable_sort(level_props.begin(), level_props.end(),
                       [](const Proposal& a, const Proposal& b) {
                         return a.score > b.score;
                       });
      level_props.resize(cfg.topk);
      std::sort(level_props.begin(), level_props.end(),
                [](const Proposal& a, const Proposal& b) {
                  return std::tie(a.cell_row, a.cell_col) <
                         std::tie(b.cell_row, b.cell_col);
                });
    }
    merged.insert(merged.end(), level_props.begin(), level_props.end());
  }
  return merged;
}

std::vector<std::size_t> rotated_nms(std::span<const RBox> boxes,
                                     std::span<const double> scores,
                                     double iou_thresh) {
  if (boxes.size() != scores.size())
    fail(Status::InvalidArgument, "nms: box/score count mismatch");
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  std::vector<std::size_t> kept;
  std::vector<bool> dead(boxes.size(), false);
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    std::size_t i = order[oi];
    if (dead[i]) continue;
    kept.push_back(i);
    for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
      std::size_t j = order[oj];
      if (!dead[j] && rotated_iou(boxes[i], boxes[j]) > iou_thresh)
        dead[j] = true;
    }
  }
  return kept;
}

RBox refine(const RBox& proposal, const RegressionTarget& v) {
  return decode_target(proposal, v);
}

double rec_score(const ProbSeq& seq) {
  if (seq.timesteps == 0)
    fail(Status::InvalidArgument, "rec_score: empty sequence");
  seq.validate();
  double sum = 0.0;
  for (std::size_t t = 0; t < seq.timesteps; ++t) {
    double best = 0.0;
    for (std::size_t c = 0; c < seq.num_classes; ++c)
      best = std::max(best, seq.at(t, c));
    sum += best;
  }
  return sum / static_cast<double>(seq.timesteps);
}

std::string greedy_decode(const ProbSeq& seq, std::string_view alphabet) {
  seq.validate();
  if (alphabet.size() + 1 != seq.num_classes)
    fail(Status::InvalidArgument,
         "greedy_decode: alphabet size " + std::to_string(alphabet.size()) +
             " does not match " + std::to_string(seq.num_classes) +
             " classes (blank included)");
  std::string out;
  std::size_t prev = seq.num_classes;  // sentinel: nothing emitted yet
  for (std::size_t t = 0; t < seq.timesteps; ++t) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < seq.num_classes; ++c)
      if (seq.at(t, c) > seq.at(t, best)) best = c;
    if (best != prev && best != seq.blank())
      out.push_back(alphabet[best]);
    prev = best;
  }
  return out;
}

std::vector<Detection> joint_filter(std::span<const Detection> dets,
                                    const FilterConfig& cfg) {
  cfg.validate();
  std::vector<Detection> kept;
  for (const Detection& d : dets)
    if (d.s_r > cfg.t_r || d.s_d > cfg.t_d) kept.push_back(d);
  std::stable_sort(kept.begin(), kept.end(),
                   [](const Detection& a, const Detection& b) {
                     return a.s_d > b.s_d;
                   });
  return kept;
}

std::vector<Detection> infer_pipeline(std::span<const LevelLogits> maps,
                                      const SecondStageProvider& provider,
                                      const FilterConfig& cfg,
                                      std::string_view alphabet,
                                      unsigned threads) {
  std::vector<Proposal> proposals = decode_proposals(maps, cfg);
  std::vector<RBox> boxes(proposals.size());
  std::vector<double> scores(proposals.size());
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    boxes[i] = proposals[i].box;
    scores[i] = proposals[i].score;
  }
  std::vector<std::size_t> kept = rotated_nms(boxes, scores, cfg.nms_iou);

  // Each survivor writes its own slot, so the result is identical for any
  // worker count.
  std::vector<Detection> dets(kept.size());
  parallel_chunks(kept.size(), threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) {
      const Proposal& prop = proposals[kept[k]];
      SecondStageOutput ss = provider(k, prop);
      if (!(ss.s_d >= 0.0 && ss.s_d <= 1.0))
        fail(Status::InvalidArgument,
             "second stage: s_d out of [0,1] at proposal " +
                 std::to_string(k));
      Detection d;
      d.box = refine(prop.box, ss.v);
      d.s_d = ss.s_d;
      if (ss.seq.timesteps > 0) {
        d.s_r = rec_score(ss.seq);
        d.transcript = greedy_decode(ss.seq, alphabet);
      }
      dets[k] = std::move(d);
    }
  });

  std::vector<Detection> filtered = joint_filter(dets, cfg);
  if (cfg.final_nms && filtered.size() > 1) {
    std::vector<RBox> fb(filtered.size());
    std::vector<double> fs(filtered.size());
    for (std::size_t i = 0; i < filtered.size(); ++i) {
      fb[i] = filtered[i].box;
      fs[i] = filtered[i].s_d;
    }
    std::vector<std::size_t> keep2 = rotated_nms(fb, fs, cfg.nms_iou);
    std::sort(keep2.begin(), keep2.end());
    std::vector<Detection> survivors;
    survivors.reserve(keep2.size());
    for (std::size_t i : keep2) survivors.push_back(std::move(filtered[i]));
    filtered = std::move(survivors);
  }
  std::sort(filtered.begin(), filtered.end(),
            [](const Detection& a, const Detection& b) {
              return std::tie(b.s_d, a.box.cx, a.box.cy, a.box.w, a.box.h,
                              a.box.theta) <
                     std::tie(a.s_d, b.box.cx, b.box.cy, b.box.w, b.box.h,
                              b.box.theta);
            });
  return filtered;
}

}  // namespace rotext
