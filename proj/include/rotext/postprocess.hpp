// Copyright (c) 2026 The rotext authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rotext/losses.hpp"
#include "rotext/targets.hpp"

namespace rotext {

// Raw network outputs for one pyramid level: an objectness logit per cell
// and five regression logit planes (l, t, r, b, theta), plane-major.
struct LevelLogits {
  LevelSpec spec;
  std::vector<double> objectness;  // H*W
  std::vector<double> regression;  // 5*H*W
  void validate() const;
};

struct Proposal {
  RBox box;
  double score = 0.0;  // first-stage objectness after the logistic
  Level level = Level::P2;
  std::size_t cell_row = 0;
  std::size_t cell_col = 0;
};

struct Detection {
  RBox box;
  double s_d = 0.0;  // detection score
  double s_r = 0.0;  // recognition score
  std::string transcript;
};

struct FilterConfig {
  double t_d = 0.7;           // detection keep threshold (strict >)
  double t_r = 0.8;           // recognition keep threshold (strict >)
  double nms_iou = 0.3;
  double score_thresh = 0.5;  // first-stage proposal gate (strict >)
  std::size_t topk = 1000;    // per-level cap after the gate
  double base_size = 640.0;   // scale of the normalized edge distances
  bool final_nms = true;      // suppress duplicates after joint filtering
  void validate() const;
};

double logistic(double x);

// Decodes one proposal per passing cell: edge distances are
// logistic(raw) * base_size, theta = logistic(raw) * pi - pi/4, box
// centered at ((col+0.5)*stride, (row+0.5)*stride). Per level the top-k by
// score are kept; levels are merged in pyramid order.
std::vector<Proposal> decode_proposals(std::span<const LevelLogits> maps,
                                       const FilterConfig& cfg);

// Greedy descending-score suppression with rotated IoU. Ties break on the
// lower index, so the result is deterministic. Returns kept indices in
// keep order (score descending).
std::vector<std::size_t> rotated_nms(std::span<const RBox> boxes,
                                     std::span<const double> scores,
                                     double iou_thresh);

// Second-stage refinement: applies the regression offsets to the proposal.
RBox refine(const RBox& proposal, const RegressionTarget& v);

// Mean over timesteps of the per-row maximum class probability (blank
// included).
double rec_score(const ProbSeq& seq);

// Best-path decoding: per-row argmax, collapse adjacent repeats, drop
// blanks. Ties pick the lowest class index.
std::string greedy_decode(const ProbSeq& seq, std::string_view alphabet);

// Keeps detections with s_r > t_r or s_d > t_d (union of the two sets),
// ordered by s_d descending (stable for equal scores).
std::vector<Detection> joint_filter(std::span<const Detection> dets,
                                    const FilterConfig& cfg);

// Second-stage outputs for one surviving proposal: refinement offsets, the
// detection class probability, and the recognition rows for the refined
// box.
struct SecondStageOutput {
  RegressionTarget v;
  double s_d = 0.0;
  ProbSeq seq;
};

// Called once per NMS survivor with its dense index (0..K-1 in keep order)
// and the surviving proposal. Must be thread-safe: survivors may be
// evaluated concurrently.
using SecondStageProvider =
    std::function<SecondStageOutput(std::size_t index, const Proposal& p)>;

// Full pipeline: decode, NMS, second stage (score + refine), recognition
// scoring and decoding on the refined box, joint filtering, optional final
// NMS. Output is sorted by s_d descending, then box coordinates, and does
// not depend on the worker count.
std::vector<Detection> infer_pipeline(std::span<const LevelLogits> maps,
                                      const SecondStageProvider& provider,
                                      const FilterConfig& cfg,
                                      std::string_view alphabet,
                                      unsigned threads = 1);

}  // namespace rotext
