// Copyright (c) 2026 The rotext authors
// SPDX-License-Identifier: Apache-2.0

#include "rotext/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rotext/error.hpp"

namespace rotext {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_or_neginf(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

double logsumexp2(double a, double b) {
  double m = std::max(a, b);
  if (m == kNegInf) return kNegInf;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double logsumexp3(double a, double b, double c) {
  double m = std::max({a, b, c});
  if (m == kNegInf) return kNegInf;
  return m + std::log(std::exp(a - m) + std::exp(b - m) + std::exp(c - m));
}

// Accumulates dice sums; shared by the single-map and per-level forms.
struct DiceSums {
  double inter = 0.0;  // sum(pred * gt)
  double total = 0.0;  // sum(pred) + sum(gt)
};

DiceSums dice_sums(std::span<const double> pred, std::span<const double> gt) {
  if (pred.size() != gt.size())
    fail(Status::InvalidArgument, "dice: pred size " +
                                      std::to_string(pred.size()) +
                                      " != gt size " + std::to_string(gt.size()));
  DiceSums s;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    s.inter += pred[i] * gt[i];
    s.total += pred[i] + gt[i];
  }
  return s;
}

// Writes grad of 1 - (2*inter+eps)/(total+eps) w.r.t. pred into out.
void dice_grad(std::span<const double> gt, const DiceSums& s, double scale,
               double* out) {
  double num = 2.0 * s.inter + kDiceEps;
  double den = s.total + kDiceEps;
  for (std::size_t i = 0; i < gt.size(); ++i)
    out[i] = scale * (num - 2.0 * gt[i] * den) / (den * den);
}

}  // namespace

ScalarGrad dice_loss(std::span<const double> pred, std::span<const double> gt) {
  if (pred.empty()) fail(Status::InvalidArgument, "dice: empty maps");
  DiceSums s = dice_sums(pred, gt);
  ScalarGrad out;
  out.value = 1.0 - (2.0 * s.inter + kDiceEps) / (s.total + kDiceEps);
  out.grad.resize(pred.size());
  dice_grad(gt, s, 1.0, out.grad.data());
  return out;
}

ScalarGrad dice_loss_levels(std::span<const MapPair> levels, DiceMode mode) {
  if (levels.empty()) fail(Status::InvalidArgument, "dice: no levels");
  std::size_t total_cells = 0;
  for (const MapPair& m : levels) total_cells += m.pred.size();
  ScalarGrad out;
  out.grad.resize(total_cells);

  if (mode == DiceMode::Joint) {
    DiceSums s;
    for (const MapPair& m : levels) {
      DiceSums part = dice_sums(m.pred, m.gt);
      s.inter += part.inter;
      s.total += part.total;
    }
    out.value = 1.0 - (2.0 * s.inter + kDiceEps) / (s.total + kDiceEps);
    double* g = out.grad.data();
    for (const MapPair& m : levels) {
      dice_grad(m.gt, s, 1.0, g);
      g += m.gt.size();
    }
    return out;
  }

  double inv_n = 1.0 / static_cast<double>(levels.size());
  double* g = out.grad.data();
  for (const MapPair& m : levels) {
    if (m.pred.empty()) fail(Status::InvalidArgument, "dice: empty level map");
    DiceSums s = dice_sums(m.pred, m.gt);
    out.value += inv_n * (1.0 - (2.0 * s.inter + kDiceEps) / (s.total + kDiceEps));
    dice_grad(m.gt, s, inv_n, g);
    g += m.gt.size();
  }
  return out;
}

ScalarGrad iou_ltrb_loss(std::span<const LtrbSample> samples,
                         double lambda_theta) {
  ScalarGrad out;
  out.grad.assign(samples.size() * 5, 0.0);
  if (samples.empty()) return out;

  constexpr double kExtentFloor = 1e-6;
  double inv_n = 1.0 / static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const EdgeDist& g = samples[i].gt;
    if (g.l < 0 || g.t < 0 || g.r < 0 || g.b < 0 || g.l + g.r <= 0 ||
        g.t + g.b <= 0)
      fail(Status::InvalidArgument,
           "iou_ltrb: degenerate ground-truth extents at sample " +
               std::to_string(i));

    const EdgeDist& p = samples[i].pred;
    // Clamped extents enter the overlap; gradient is zero in the clamp
    // region (constant branch).
    double lp = std::max(p.l, kExtentFloor), tp = std::max(p.t, kExtentFloor);
    double rp = std::max(p.r, kExtentFloor), bp = std::max(p.b, kExtentFloor);

    double iw = std::min(lp, g.l) + std::min(rp, g.r);
    double ih = std::min(tp, g.t) + std::min(bp, g.b);
    double inter = iw * ih;
    double area_p = (lp + rp) * (tp + bp);
    double area_g = (g.l + g.r) * (g.t + g.b);
    double uni = area_p + area_g - inter;

    double dtheta = g.theta - p.theta;
    out.value +=
        inv_n * (std::log(uni) - std::log(inter) + lambda_theta * std::abs(dtheta));

    // d(inter)/d(extent): the min picks the pred side only when it is
    // strictly smaller; d(area_p)/d(extent) is the opposite span sum.
    double diw_d[4] = {lp < g.l ? 1.0 : 0.0, 0.0, rp < g.r ? 1.0 : 0.0, 0.0};
    double dih_d[4] = {0.0, tp < g.t ? 1.0 : 0.0, 0.0, bp < g.b ? 1.0 : 0.0};
    double dap_d[4] = {tp + bp, lp + rp, tp + bp, lp + rp};
    double* grad = out.grad.data() + i * 5;
    const double raw[4] = {p.l, p.t, p.r, p.b};
    for (int k = 0; k < 4; ++k) {
      if (raw[k] < kExtentFloor) continue;  // clamped: constant branch
      double dinter = diw_d[k] * ih + dih_d[k] * iw;
      double duni = dap_d[k] - dinter;
      grad[k] = inv_n * (duni / uni - dinter / inter);
    }
    double sign = dtheta > 0 ? -1.0 : (dtheta < 0 ? 1.0 : 0.0);
    grad[4] = inv_n * lambda_theta * sign;
  }
  return out;
}

namespace {

// Huber term and derivative for one difference d = v - vstar.
inline void huber(double d, double& value, double& deriv) {
  double a = std::abs(d);
  if (a < 1.0) {
    value = 0.5 * d * d;
    deriv = d;
  } else {
    value = a - 0.5;
    deriv = d > 0 ? 1.0 : -1.0;
  }
}

void smooth_l1_accum(const RegressionTarget& v, const RegressionTarget& vstar,
                     double scale, double& value, double* grad) {
  const double d[5] = {v.vx - vstar.vx, v.vy - vstar.vy, v.vw - vstar.vw,
                       v.vh - vstar.vh, v.vtheta - vstar.vtheta};
  for (int k = 0; k < 5; ++k) {
    double term, deriv;
    huber(d[k], term, deriv);
    value += scale * term;
    grad[k] = scale * deriv;
  }
}

}  // namespace

ScalarGrad smooth_l1(const RegressionTarget& v, const RegressionTarget& vstar) {
  ScalarGrad out;
  out.grad.assign(5, 0.0);
  smooth_l1_accum(v, vstar, 1.0, out.value, out.grad.data());
  return out;
}

ScalarGrad smooth_l1_batch(std::span<const RegressionTarget> v,
                           std::span<const RegressionTarget> vstar) {
  if (v.size() != vstar.size())
    fail(Status::InvalidArgument, "smooth_l1: batch size mismatch");
  ScalarGrad out;
  out.grad.assign(v.size() * 5, 0.0);
  if (v.empty()) return out;
  double inv_n = 1.0 / static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    smooth_l1_accum(v[i], vstar[i], inv_n, out.value, out.grad.data() + i * 5);
  return out;
}

ScalarGrad cross_entropy(std::span<const double> probs,
                         std::size_t true_class) {
  if (true_class >= probs.size())
    fail(Status::InvalidArgument,
         "cross_entropy: true class " + std::to_string(true_class) +
             " out of range " + std::to_string(probs.size()));
  ScalarGrad out;
  out.grad.assign(probs.size(), 0.0);
  double c = probs[true_class];
  out.value = -std::log(std::max(c, kLogClamp));
  if (c > kLogClamp) out.grad[true_class] = -1.0 / c;
  return out;
}

ScalarGrad cross_entropy_batch(std::span<const std::vector<double>> probs,
                               std::span<const std::size_t> true_classes) {
  if (probs.size() != true_classes.size())
    fail(Status::InvalidArgument, "cross_entropy: batch size mismatch");
  ScalarGrad out;
  if (probs.empty()) return out;
  double inv_n = 1.0 / static_cast<double>(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    ScalarGrad one = cross_entropy(probs[i], true_classes[i]);
    out.value += inv_n * one.value;
    for (double g : one.grad) out.grad.push_back(inv_n * g);
  }
  return out;
}

void ProbSeq::validate(double tol) const {
  if (num_classes < 2)
    fail(Status::InvalidArgument, "prob seq: need at least one class plus blank");
  if (p.size() != timesteps * num_classes)
    fail(Status::InvalidArgument,
         "prob seq: storage holds " + std::to_string(p.size()) +
             " values, expected " + std::to_string(timesteps * num_classes));
  for (std::size_t t = 0; t < timesteps; ++t) {
    double sum = 0.0;
    for (std::size_t c = 0; c < num_classes; ++c) {
      double v = at(t, c);
      if (!(v >= 0.0 && v <= 1.0))
        fail(Status::InvalidArgument,
             "prob seq: entry out of [0,1] at row " + std::to_string(t));
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol)
      fail(Status::InvalidArgument,
           "prob seq: row " + std::to_string(t) + " sums to " +
               std::to_string(sum));
  }
}

std::size_t ctc_min_frames(std::span<const int> label) {
  std::size_t n = label.size();
  for (std::size_t i = 1; i < label.size(); ++i)
    if (label[i] == label[i - 1]) ++n;  // repeat needs a separating blank
  return n;
}

std::vector<int> label_to_indices(std::string_view transcript,
                                  std::string_view alphabet) {
  std::vector<int> out;
  out.reserve(transcript.size());
  for (char ch : transcript) {
    std::size_t pos = alphabet.find(ch);
    if (pos == std::string_view::npos)
      fail(Status::InvalidArgument,
           std::string("transcript character '") + ch + "' not in alphabet");
    out.push_back(static_cast<int>(pos));
  }
  return out;
}

ScalarGrad ctc_nll(const ProbSeq& seq, std::span<const int> label) {
  const std::size_t T = seq.timesteps;
  const std::size_t C = seq.num_classes;
  if (C < 1 || seq.p.size() != T * C)
    fail(Status::InvalidArgument, "ctc: malformed probability sequence");
  if (T == 0) fail(Status::InvalidArgument, "ctc: empty sequence");
  const int blank = static_cast<int>(C) - 1;
  for (std::size_t i = 0; i < label.size(); ++i)
    if (label[i] < 0 || label[i] >= blank)
      fail(Status::InvalidArgument,
           "ctc: label index " + std::to_string(label[i]) +
               " out of alphabet at position " + std::to_string(i));

  std::size_t need = ctc_min_frames(label);
  if (T < need)
    fail(Status::Infeasible, "ctc: " + std::to_string(T) +
                                 " frames cannot emit a label needing " +
                                 std::to_string(need));

  // Blank-expanded label: blank, l1, blank, l2, ..., blank.
  const std::size_t M = 2 * label.size() + 1;
  std::vector<int> ext(M, blank);
  for (std::size_t i = 0; i < label.size(); ++i) ext[2 * i + 1] = label[i];

  auto lp = [&](std::size_t t, std::size_t m) {
    return log_or_neginf(seq.at(t, static_cast<std::size_t>(ext[m])));
  };

  std::vector<double> alpha(T * M, kNegInf), beta(T * M, kNegInf);
  alpha[0] = lp(0, 0);
  if (M > 1) alpha[1] = lp(0, 1);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t m = 0; m < M; ++m) {
      double prev = alpha[(t - 1) * M + m];
      if (m >= 1) prev = logsumexp2(prev, alpha[(t - 1) * M + m - 1]);
      if (m >= 2 && ext[m] != blank && ext[m] != ext[m - 2])
        prev = logsumexp2(prev, alpha[(t - 1) * M + m - 2]);
      alpha[t * M + m] = prev + lp(t, m);
    }
  }
  double logp = alpha[(T - 1) * M + M - 1];
  if (M > 1) logp = logsumexp2(logp, alpha[(T - 1) * M + M - 2]);

  beta[(T - 1) * M + M - 1] = lp(T - 1, M - 1);
  if (M > 1) beta[(T - 1) * M + M - 2] = lp(T - 1, M - 2);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t m = 0; m < M; ++m) {
      double nxt = beta[(t + 1) * M + m];
      if (m + 1 < M) nxt = logsumexp2(nxt, beta[(t + 1) * M + m + 1]);
      if (m + 2 < M && ext[m + 2] != blank && ext[m + 2] != ext[m])
        nxt = logsumexp2(nxt, beta[(t + 1) * M + m + 2]);
      beta[t * M + m] = nxt + lp(t, m);
    }
  }

  ScalarGrad out;
  out.value = -logp;  // +inf when no path has nonzero probability
  out.grad.assign(T * C, 0.0);
  if (logp == kNegInf) return out;

  // alpha and beta both carry the emission at (t,m), so the posterior mass
  // through symbol k at time t is exp(alpha+beta - 2*log y) summed over
  // matching positions; d(-ln p)/dy_t(k) = -exp(S - logp - 2*log y).
  std::vector<double> s_k(C);
  for (std::size_t t = 0; t < T; ++t) {
    std::fill(s_k.begin(), s_k.end(), kNegInf);
    for (std::size_t m = 0; m < M; ++m) {
      auto k = static_cast<std::size_t>(ext[m]);
      s_k[k] = logsumexp2(s_k[k], alpha[t * M + m] + beta[t * M + m]);
    }
    for (std::size_t k = 0; k < C; ++k) {
      if (s_k[k] == kNegInf) continue;
      double y = seq.at(t, k);
      out.grad[t * C + k] = -std::exp(s_k[k] - logp - 2.0 * std::log(y));
    }
  }
  return out;
}

double ctc_nll_batch(std::span<const ProbSeq> seqs,
                     std::span<const std::vector<int>> labels) {
  if (seqs.size() != labels.size())
    fail(Status::InvalidArgument, "ctc: batch size mismatch");
  if (seqs.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < seqs.size(); ++i)
    sum += ctc_nll(seqs[i], labels[i]).value;
  return sum / static_cast<double>(seqs.size());
}

double first_stage_loss(double obj_loss, double reg_loss,
                        const LossWeights& weights) {
  if (weights.lambda_obj < 0 || weights.lambda_reg < 0 ||
      weights.lambda_theta < 0)
    fail(Status::InvalidArgument, "loss weights must be nonnegative");
  return weights.lambda_obj * obj_loss + weights.lambda_reg * reg_loss;
}

double total_loss(double first_stage, double fcls, double freg, double frec) {
  return first_stage + fcls + freg + frec;
}

}  // namespace rotext
