// Copyright (c) 2026 The rotext authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "rotext/geometry.hpp"
#include "rotext/targets.hpp"

namespace rotext {

// Multi-task loss weights: objectness, regression, angle.
struct LossWeights {
  double lambda_obj = 0.01;
  double lambda_reg = 1.0;
  double lambda_theta = 20.0;
};

// A scalar loss plus its gradient with respect to the prediction inputs.
struct ScalarGrad {
  double value = 0.0;
  std::vector<double> grad;
};

inline constexpr double kDiceEps = 1e-6;
inline constexpr double kLogClamp = 1e-12;

// 1 - (2*sum(pred*gt)+eps) / (sum(pred)+sum(gt)+eps); gradient w.r.t.
// pred. The inputs are usually the level maps concatenated into one
// vector.
ScalarGrad dice_loss(std::span<const double> pred,
                     std::span<const double> gt);

enum class DiceMode { Joint, PerLevelMean };

struct MapPair {
  std::span<const double> pred;
  std::span<const double> gt;
};

// Joint mode computes one dice over the concatenation; PerLevelMean
// averages a dice per level. Gradients are concatenated in level order.
ScalarGrad dice_loss_levels(std::span<const MapPair> levels, DiceMode mode);

// One positive location: predicted and ground-truth edge distances.
struct LtrbSample {
  EdgeDist pred;
  EdgeDist gt;
};

// Mean over locations of -ln(IoU) + lambda_theta * |theta_gt - theta_pred|
// with the axis-aligned edge-distance overlap
//   inter = (min(l,l*)+min(r,r*)) * (min(t,t*)+min(b,b*)).
// Predicted extents are clamped at 1e-6 before the log. Gradient is 5
// entries (l, t, r, b, theta) per sample w.r.t. the prediction.
ScalarGrad iou_ltrb_loss(std::span<const LtrbSample> samples,
                         double lambda_theta);

// Sum over the 5 target terms of the Huber penalty
// {0.5 d^2 if |d|<1 else |d|-0.5}; gradient w.r.t. v.
ScalarGrad smooth_l1(const RegressionTarget& v, const RegressionTarget& vstar);

// Batch form: mean of per-pair sums over the positive count.
ScalarGrad smooth_l1_batch(std::span<const RegressionTarget> v,
                           std::span<const RegressionTarget> vstar);

// -ln c[true_class], with the probability clamped at 1e-12.
ScalarGrad cross_entropy(std::span<const double> probs, std::size_t true_class);

// Batch form: mean over all entries.
ScalarGrad cross_entropy_batch(std::span<const std::vector<double>> probs,
                               std::span<const std::size_t> true_classes);

// Per-timestep class probabilities over the alphabet plus a trailing blank
// column.
struct ProbSeq {
  std::size_t timesteps = 0;
  std::size_t num_classes = 0;  // |S| + 1, blank last
  std::vector<double> p;        // row-major timesteps x num_classes

  double at(std::size_t t, std::size_t c) const {
    return p[t * num_classes + c];
  }
  double& at(std::size_t t, std::size_t c) { return p[t * num_classes + c]; }
  std::size_t blank() const { return num_classes - 1; }

  // Checks shape, entries in [0,1] and row sums within `tol` of 1.
  void validate(double tol = 1e-6) const;
};

// Shortest frame count that can emit the label (repeats need a blank).
std::size_t ctc_min_frames(std::span<const int> label);

// Maps a transcript onto alphabet indices; errors on unknown characters.
std::vector<int> label_to_indices(std::string_view transcript,
                                  std::string_view alphabet);

// Negative log-likelihood of the label under the standard forward dynamic
// program over the blank-expanded label, with the gradient over all of
// seq.p. Too few frames raises an infeasible error rather than returning
// infinity.
ScalarGrad ctc_nll(const ProbSeq& seq, std::span<const int> label);

// Mean of per-sequence negative log-likelihoods over the positive count.
double ctc_nll_batch(std::span<const ProbSeq> seqs,
                     std::span<const std::vector<int>> labels);

// lambda_obj * obj + lambda_reg * reg.
double first_stage_loss(double obj_loss, double reg_loss,
                        const LossWeights& weights);

// Sum of the first-stage loss and the three second-stage terms.
double total_loss(double first_stage, double fcls, double freg, double frec);

}  // namespace rotext
