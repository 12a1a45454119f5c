// Copyright (c) 2026 The rotext authors
// SPDX-License-Identifier: Apache-2.0

#include "rotext/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>

#include "rotext/error.hpp"
#include "rotext/losses.hpp"
#include "rotext/tensor_io.hpp"

namespace rotext {

namespace {

LevelLogits load_level(const RunManifest& m, const ManifestLevel& lv) {
  LevelLogits out;
  out.spec.level = level_from_stride(lv.stride);
  out.spec.stride = lv.stride;
  auto stride = static_cast<std::size_t>(lv.stride);
  out.spec.height = (m.image_height + stride - 1) / stride;
  out.spec.width = (m.image_width + stride - 1) / stride;

  Tensor obj = read_tensor(m.resolve(lv.objectness));
  std::vector<std::uint32_t> hw = obj.dims;
  if (hw.size() == 3 && hw[0] == 1) hw.erase(hw.begin());
  if (hw.size() != 2 || hw[0] != out.spec.height || hw[1] != out.spec.width)
    fail(Status::InvalidArgument,
         m.resolve(lv.objectness) + ": expected " +
             std::to_string(out.spec.height) + "x" +
             std::to_string(out.spec.width) + " for stride " +
             std::to_string(lv.stride) + " over a " +
             std::to_string(m.image_width) + "x" +
             std::to_string(m.image_height) + " image");
  out.objectness.assign(obj.data.begin(), obj.data.end());

  Tensor reg = read_tensor(m.resolve(lv.regression));
  if (reg.dims.size() != 3 || reg.dims[0] != 5 ||
      reg.dims[1] != out.spec.height || reg.dims[2] != out.spec.width)
    fail(Status::InvalidArgument,
         m.resolve(lv.regression) + ": expected 5x" +
             std::to_string(out.spec.height) + "x" +
             std::to_string(out.spec.width));
  out.regression.assign(reg.data.begin(), reg.data.end());
  return out;
}

// Second stage read from dumped tensors, keyed by NMS-survivor order.
class FileSecondStage {
 public:
  FileSecondStage(const RunManifest& m, const SecondStageFiles& files)
      : reg_(read_tensor(m.resolve(files.regression))),
        scores_(read_tensor(m.resolve(files.scores))),
        probs_(read_tensor(m.resolve(files.probs))),
        reg_path_(m.resolve(files.regression)) {
    if (reg_.dims.size() != 2 || reg_.dims[1] != 5)
      fail(Status::InvalidArgument, reg_path_ + ": expected K x 5");
    std::size_t k = reg_.dims[0];
    if (scores_.dims.size() != 1 || scores_.dims[0] != k)
      fail(Status::InvalidArgument,
           m.resolve(files.scores) + ": expected " + std::to_string(k) +
               " scores");
    if (probs_.dims.size() != 3 || probs_.dims[0] != k)
      fail(Status::InvalidArgument,
           m.resolve(files.probs) + ": expected " + std::to_string(k) +
               " x T x C probabilities");
    if (probs_.dims[2] != m.alphabet.size() + 1)
      fail(Status::InvalidArgument,
           m.resolve(files.probs) + ": " + std::to_string(probs_.dims[2]) +
               " classes do not fit an alphabet of " +
               std::to_string(m.alphabet.size()) + " plus blank");
  }

  SecondStageOutput operator()(std::size_t index, const Proposal&) const {
    std::size_t k = reg_.dims[0];
    if (index >= k)
      fail(Status::InvalidArgument,
           reg_path_ + ": holds " + std::to_string(k) +
               " proposals but the pipeline kept at least " +
               std::to_string(index + 1));
    SecondStageOutput out;
    const float* r = reg_.data.data() + index * 5;
    out.v = RegressionTarget{r[0], r[1], r[2], r[3], r[4]};
    out.s_d = scores_.data[index];
    std::size_t t = probs_.dims[1], c = probs_.dims[2];
    out.seq.timesteps = t;
    out.seq.num_classes = c;
    out.seq.p.resize(t * c);
    const float* p = probs_.data.data() + index * t * c;
    // Renormalize each row in double so float32 dumps still satisfy the
    // row-sum invariant exactly.
    for (std::size_t i = 0; i < t; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < c; ++j) {
        double v = p[i * c + j];
        if (!(v >= 0.0))
          fail(Status::InvalidArgument,
               "second stage: negative probability in proposal " +
                   std::to_string(index));
        sum += v;
      }
      if (sum <= 0.0)
        fail(Status::InvalidArgument,
             "second stage: zero probability row in proposal " +
                 std::to_string(index));
      for (std::size_t j = 0; j < c; ++j)
        out.seq.p[i * c + j] = p[i * c + j] / sum;
    }
    return out;
  }

 private:
  Tensor reg_, scores_, probs_;
  std::string reg_path_;
};

}  // namespace

std::vector<Detection> run_inference(const RunManifest& m, unsigned threads) {
  std::vector<LevelLogits> levels;
  levels.reserve(m.levels.size());
  std::vector<ManifestLevel> sorted = m.levels;
  std::sort(sorted.begin(), sorted.end(),
            [](const ManifestLevel& a, const ManifestLevel& b) {
              return a.stride < b.stride;
            });
  for (const ManifestLevel& lv : sorted) levels.push_back(load_level(m, lv));

  SecondStageProvider provider;
  if (m.second_stage) {
    provider = FileSecondStage(m, *m.second_stage);
  } else {
    provider = [](std::size_t, const Proposal& p) {
      SecondStageOutput out;
      out.s_d = p.score;  // stub: identity refinement, first-stage score
      return out;
    };
  }
  return infer_pipeline(levels, provider, m.config, m.alphabet, threads);
}

std::vector<std::string> gen_target_files(std::span<const GroundTruth> gts,
                                          std::size_t image_w,
                                          std::size_t image_h, double shrink,
                                          const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(Status::Io, "cannot create " + out_dir + ": " + ec.message());

  std::vector<std::string> written;
  for (const LevelSpec& spec : make_level_specs(image_w, image_h)) {
    std::string tag = level_name(spec.level);
    std::transform(tag.begin(), tag.end(), tag.begin(),
                   [](unsigned char ch) { return std::tolower(ch); });
    auto h = static_cast<std::uint32_t>(spec.height);
    auto w = static_cast<std::uint32_t>(spec.width);

    std::vector<std::uint8_t> cls = gen_cls_map(gts, spec, shrink);
    Tensor ct;
    ct.dims = {h, w};
    ct.data.assign(cls.begin(), cls.end());
    std::string cls_path =
        (std::filesystem::path(out_dir) / ("cls_" + tag + ".rten")).string();
    write_tensor(cls_path, ct);
    written.push_back(cls_path);

    std::vector<double> reg = gen_reg_map(gts, spec, shrink);
    Tensor rt;
    rt.dims = {5, h, w};
    rt.data.assign(reg.begin(), reg.end());
    std::string reg_path =
        (std::filesystem::path(out_dir) / ("reg_" + tag + ".rten")).string();
    write_tensor(reg_path, rt);
    written.push_back(reg_path);
  }
  return written;
}

namespace {

double fd_central(const std::function<double(double)>& f, double x) {
  constexpr double h = 1e-5;
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

double rel_err(double analytic, double numeric) {
  double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
  return std::abs(analytic - numeric) / denom;
}

// Compares every gradient entry of `loss` (evaluated at x) against central
// differences over the same function.
double check_grad(std::vector<double> x,
                  const std::function<ScalarGrad(std::span<const double>)>&
                      loss,
                  double fault) {
  ScalarGrad at = loss(x);
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double numeric = fd_central(
        [&](double v) {
          std::vector<double> y = x;
          y[i] = v;
          return loss(y).value;
        },
        x[i]);
    double analytic = at.grad.at(i) + (i == 0 ? fault : 0.0);
    worst = std::max(worst, rel_err(analytic, numeric));
  }
  return worst;
}

}  // namespace

std::vector<GradCheckReport> loss_gradient_check(std::uint64_t seed,
                                                 std::size_t trials,
                                                 double fault) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  std::vector<GradCheckReport> reports;
  auto run = [&](const char* name, auto&& one_trial) {
    GradCheckReport r;
    r.name = name;
    for (std::size_t t = 0; t < trials; ++t)
      r.max_rel_err = std::max(r.max_rel_err, one_trial());
    r.pass = r.max_rel_err <= kGradCheckTol;
    reports.push_back(std::move(r));
  };

  run("dice", [&] {
    std::size_t n = 32;
    std::vector<double> pred(n), gt(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = uniform(0.05, 0.95);
      gt[i] = rng() % 2 ? 1.0 : 0.0;
    }
    return check_grad(
        pred, [&](std::span<const double> p) { return dice_loss(p, gt); },
        fault);
  });

  run("iou_ltrb", [&] {
    std::size_t n = 6;
    std::vector<LtrbSample> samples(n);
    std::vector<double> x(n * 5);
    for (std::size_t i = 0; i < n; ++i) {
      EdgeDist& g = samples[i].gt;
      g.l = uniform(5, 50);
      g.t = uniform(5, 50);
      g.r = uniform(5, 50);
      g.b = uniform(5, 50);
      g.theta = uniform(kAngleLo, kAngleLo + kPi);
      // Keep the prediction away from the min() kinks and the |dtheta|
      // kink so central differences see a smooth function.
      auto offset = [&] {
        double d = uniform(0.5, 5.0);
        return rng() % 2 ? d : -d;
      };
      x[i * 5 + 0] = std::max(1.0, g.l + offset());
      x[i * 5 + 1] = std::max(1.0, g.t + offset());
      x[i * 5 + 2] = std::max(1.0, g.r + offset());
      x[i * 5 + 3] = std::max(1.0, g.b + offset());
      x[i * 5 + 4] = g.theta + (rng() % 2 ? 1 : -1) * uniform(0.01, 0.3);
    }
    return check_grad(
        x,
        [&](std::span<const double> v) {
          std::vector<LtrbSample> s = samples;
          for (std::size_t i = 0; i < n; ++i) {
            s[i].pred.l = v[i * 5 + 0];
            s[i].pred.t = v[i * 5 + 1];
            s[i].pred.r = v[i * 5 + 2];
            s[i].pred.b = v[i * 5 + 3];
            s[i].pred.theta = v[i * 5 + 4];
          }
          return iou_ltrb_loss(s, 20.0);
        },
        fault);
  });

  run("smooth_l1", [&] {
    std::size_t n = 4;
    std::vector<RegressionTarget> vstar(n);
    std::vector<double> x(n * 5);
    for (std::size_t i = 0; i < n; ++i) {
      vstar[i] = RegressionTarget{uniform(-1, 1), uniform(-1, 1),
                                  uniform(-1, 1), uniform(-1, 1),
                                  uniform(-0.5, 0.5)};
      for (std::size_t k = 0; k < 5; ++k) {
        double d;
        do {
          d = uniform(-2.0, 2.0);
        } while (std::abs(std::abs(d) - 1.0) < 0.05);
        double base = k == 0   ? vstar[i].vx
                      : k == 1 ? vstar[i].vy
                      : k == 2 ? vstar[i].vw
                      : k == 3 ? vstar[i].vh
                               : vstar[i].vtheta;
        x[i * 5 + k] = base + d;
      }
    }
    return check_grad(
        x,
        [&](std::span<const double> v) {
          std::vector<RegressionTarget> vp(n);
          for (std::size_t i = 0; i < n; ++i)
            vp[i] = RegressionTarget{v[i * 5], v[i * 5 + 1], v[i * 5 + 2],
                                     v[i * 5 + 3], v[i * 5 + 4]};
          return smooth_l1_batch(vp, vstar);
        },
        fault);
  });

  run("cross_entropy", [&] {
    std::size_t n = 4;
    std::vector<double> probs(n);
    double sum = 0.0;
    for (double& p : probs) {
      p = uniform(0.1, 1.0);
      sum += p;
    }
    for (double& p : probs) p /= sum;
    std::size_t true_class = rng() % n;
    return check_grad(
        probs,
        [&](std::span<const double> p) { return cross_entropy(p, true_class); },
        fault);
  });

  run("ctc", [&] {
    ProbSeq seq;
    seq.timesteps = 5;
    seq.num_classes = 4;
    seq.p.resize(seq.timesteps * seq.num_classes);
    for (std::size_t t = 0; t < seq.timesteps; ++t) {
      double sum = 0.0;
      for (std::size_t c = 0; c < seq.num_classes; ++c) {
        seq.p[t * seq.num_classes + c] = uniform(0.1, 1.0);
        sum += seq.p[t * seq.num_classes + c];
      }
      for (std::size_t c = 0; c < seq.num_classes; ++c)
        seq.p[t * seq.num_classes + c] /= sum;
    }
    std::vector<int> label(1 + rng() % 3);
    for (int& l : label) l = static_cast<int>(rng() % 3);
    if (ctc_min_frames(label) > seq.timesteps) label.resize(1);
    return check_grad(
        seq.p,
        [&](std::span<const double> p) {
          ProbSeq s = seq;
          s.p.assign(p.begin(), p.end());
          return ctc_nll(s, label);
        },
        fault);
  });

  return reports;
}

}  // namespace rotext
