// Copyright (c) 2026 The rotext authors
// SPDX-License-Identifier: Apache-2.0

#include "rotext/eval.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "rotext/error.hpp"

namespace rotext {

EvalReport evaluate(std::span<const Detection> dets,
                    std::span<const GroundTruth> gts, double iou_thresh) {
  if (!(iou_thresh >= 0.0 && iou_thresh <= 1.0))
    fail(Status::InvalidArgument, "evaluate: iou_thresh must be in [0,1]");

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return dets[a].s_d > dets[b].s_d;
                   });

  std::vector<bool> taken(gts.size(), false);
  EvalReport r;
  for (std::size_t i : order) {
    double best_iou = 0.0;
    std::size_t best_gt = gts.size();
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      double iou = rotated_iou(dets[i].box, gts[g].box);
      if (iou > best_iou) {
        best_iou = iou;
        best_gt = g;
      }
    }
    if (best_gt < gts.size() && best_iou >= iou_thresh) {
      taken[best_gt] = true;
      ++r.true_positives;
    } else {
      ++r.false_positives;
    }
  }
  r.false_negatives = gts.size() - r.true_positives;

  if (dets.empty())
    r.precision = gts.empty() ? 1.0 : 0.0;
  else
    r.precision = static_cast<double>(r.true_positives) /
                  static_cast<double>(dets.size());
  r.recall = gts.empty() ? 1.0
                         : static_cast<double>(r.true_positives) /
                               static_cast<double>(gts.size());
  double pr = r.precision + r.recall;
  r.f_measure = pr > 0.0 ? 2.0 * r.precision * r.recall / pr : 0.0;
  return r;
}

}  // namespace rotext
