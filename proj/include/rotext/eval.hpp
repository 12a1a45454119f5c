// Copyright (c) 2026 The rotext authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>

#include "rotext/postprocess.hpp"
#include "rotext/targets.hpp"

namespace rotext {

struct EvalReport {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
};

// Greedy one-to-one matching in descending s_d: each detection takes the
// unmatched ground truth with the highest rotated IoU if that IoU reaches
// the threshold. Precision is 1 when both sides are empty, 0 when
// detections are absent but ground truth exists; recall over empty ground
// truth is vacuously 1.
EvalReport evaluate(std::span<const Detection> dets,
                    std::span<const GroundTruth> gts, double iou_thresh = 0.5);

}  // namespace rotext
