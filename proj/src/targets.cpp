// Copyright (c) 2026 The rotext authors
// SPDX-License-Identifier: Apache-2.0

#include "rotext/targets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <tuple>

#include "rotext/error.hpp"

namespace rotext {

namespace {

constexpr double kIouGate = 0.6;
constexpr double kAngleGate = kPi / 6.0;

struct OwnerCell {
  std::int32_t gt = -1;
  double area = std::numeric_limits<double>::infinity();
};

bool owner_beats(const GroundTruth& challenger, const OwnerCell& cell,
                 std::span<const GroundTruth> gts) {
  if (cell.gt < 0) return true;
  const double area = challenger.box.w * challenger.box.h;
  if (area != cell.area) return area < cell.area;
  // Equal-area ties break on the box tuple so the result is independent
  // of ground-truth list order.
  const RBox& a = challenger.box;
  const RBox& b = gts[static_cast<std::size_t>(cell.gt)].box;
  return std::tie(a.cx, a.cy, a.w, a.h, a.theta) <
         std::tie(b.cx, b.cy, b.w, b.h, b.theta);
}

// Per-cell winning ground-truth index for one level, -1 where negative.
std::vector<OwnerCell> owner_map(std::span<const GroundTruth> gts,
                                 const LevelSpec& spec, double shrink) {
  std::vector<OwnerCell> owners(spec.height * spec.width);
  for (std::size_t k = 0; k < gts.size(); ++k) {
    const GroundTruth& gt = gts[k];
    if (assign_level(gt.box) != spec.level) continue;
    const RBox shrunk = shrink_box(gt.box, shrink);
    // Only cells under the shrunk box's bounding rectangle can be inside.
    const Quad q = box_vertices(shrunk);
    double xmin = q[0].x, xmax = q[0].x, ymin = q[0].y, ymax = q[0].y;
    for (const Vec2& v : q) {
      xmin = std::min(xmin, v.x);
      xmax = std::max(xmax, v.x);
      ymin = std::min(ymin, v.y);
      ymax = std::max(ymax, v.y);
    }
    const double s = spec.stride;
    const std::int64_t c0 = std::max<std::int64_t>(
        0, static_cast<std::int64_t>(std::floor(xmin / s - 0.5)));
    const std::int64_t c1 = std::min<std::int64_t>(
        static_cast<std::int64_t>(spec.width) - 1,
        static_cast<std::int64_t>(std::ceil(xmax / s - 0.5)));
    const std::int64_t r0 = std::max<std::int64_t>(
        0, static_cast<std::int64_t>(std::floor(ymin / s - 0.5)));
    const std::int64_t r1 = std::min<std::int64_t>(
        static_cast<std::int64_t>(spec.height) - 1,
        static_cast<std::int64_t>(std::ceil(ymax / s - 0.5)));
    for (std::int64_t row = r0; row <= r1; ++row) {
      for (std::int64_t col = c0; col <= c1; ++col) {
        const Vec2 center = cell_center(spec, static_cast<std::size_t>(row),
                                        static_cast<std::size_t>(col));
        if (!contains_point(shrunk, center.x, center.y)) continue;
        OwnerCell& cell =
            owners[static_cast<std::size_t>(row) * spec.width +
                   static_cast<std::size_t>(col)];
        if (owner_beats(gt, cell, gts)) {
          cell.gt = static_cast<std::int32_t>(k);
          cell.area = gt.box.w * gt.box.h;
        }
      }
    }
  }
  return owners;
}

}  // namespace

int stride_of(Level level) { return 4 << static_cast<int>(level); }

Level level_from_stride(int stride) {
  switch (stride) {
    case 4:
      return Level::P2;
    case 8:
      return Level::P3;
    case 16:
      return Level::P4;
    case 32:
      return Level::P5;
    default:
      fail(Status::InvalidArgument,
           "stride must be one of 4, 8, 16, 32; got " + std::to_string(stride));
  }
}

const char* level_name(Level level) {
  switch (level) {
    case Level::P2:
      return "p2";
    case Level::P3:
      return "p3";
    case Level::P4:
      return "p4";
    case Level::P5:
      return "p5";
  }
  return "?";
}

Level assign_level(const RBox& box) {
  const double area = box.w * box.h;
  if (area <= 64.0 * 64.0) return Level::P2;
  if (area <= 128.0 * 128.0) return Level::P3;
  if (area <= 256.0 * 256.0) return Level::P4;
  return Level::P5;
}

std::array<LevelSpec, kNumLevels> make_level_specs(std::size_t image_w,
                                                   std::size_t image_h) {
  if (image_w == 0 || image_h == 0) {
    fail(Status::InvalidArgument, "image size must be positive");
  }
  std::array<LevelSpec, kNumLevels> specs;
  for (int i = 0; i < kNumLevels; ++i) {
    const Level level = static_cast<Level>(i);
    const std::size_t s = static_cast<std::size_t>(stride_of(level));
    specs[i] = LevelSpec{level, static_cast<int>(s), (image_h + s - 1) / s,
                         (image_w + s - 1) / s};
  }
  return specs;
}

RBox shrink_box(const RBox& box, double factor) {
  if (!(factor > 0.0) || factor > 1.0) {
    fail(Status::InvalidArgument, "shrink factor must be in (0, 1]");
  }
  return make_rbox(box.cx, box.cy, box.w * factor, box.h * factor, box.theta);
}

std::vector<std::uint8_t> gen_cls_map(std::span<const GroundTruth> gts,
                                      const LevelSpec& spec, double shrink) {
  const std::vector<OwnerCell> owners = owner_map(gts, spec, shrink);
  std::vector<std::uint8_t> cls(owners.size(), 0);
  for (std::size_t i = 0; i < owners.size(); ++i) {
    cls[i] = owners[i].gt >= 0 ? 1 : 0;
  }
  return cls;
}

std::vector<double> gen_reg_map(std::span<const GroundTruth> gts,
                                const LevelSpec& spec, double shrink) {
  const std::vector<OwnerCell> owners = owner_map(gts, spec, shrink);
  const std::size_t plane = spec.height * spec.width;
  std::vector<double> reg(5 * plane, 0.0);
  for (std::size_t row = 0; row < spec.height; ++row) {
    for (std::size_t col = 0; col < spec.width; ++col) {
      const std::size_t idx = row * spec.width + col;
      if (owners[idx].gt < 0) continue;
      const RBox& box = gts[static_cast<std::size_t>(owners[idx].gt)].box;
      const Vec2 center = cell_center(spec, row, col);
      const Vec2 uv = box_frame_offset(box, center.x, center.y);
      // A center inside the shrunk box is interior to the full box for any
      // shrink < 1; the max() guards the boundary at shrink == 1.
      reg[0 * plane + idx] = std::max(0.0, box.w / 2.0 + uv.x);
      reg[1 * plane + idx] = std::max(0.0, box.h / 2.0 + uv.y);
      reg[2 * plane + idx] = std::max(0.0, box.w / 2.0 - uv.x);
      reg[3 * plane + idx] = std::max(0.0, box.h / 2.0 - uv.y);
      reg[4 * plane + idx] = box.theta;
    }
  }
  return reg;
}

RegressionTarget encode_target(const RBox& proposal, const RBox& gt) {
  RegressionTarget v;
  v.vx = (gt.cx - proposal.cx) / proposal.w;
  v.vy = (gt.cy - proposal.cy) / proposal.h;
  v.vw = std::log(gt.w / proposal.w);
  v.vh = std::log(gt.h / proposal.h);
  v.vtheta = angle_diff(gt.theta, proposal.theta);
  return v;
}

RBox decode_target(const RBox& proposal, const RegressionTarget& v) {
  if (!std::isfinite(v.vx) || !std::isfinite(v.vy) || !std::isfinite(v.vw) ||
      !std::isfinite(v.vh) || !std::isfinite(v.vtheta)) {
    fail(Status::InvalidArgument, "regression target must be finite");
  }
  const double w = proposal.w * std::exp(v.vw);
  const double h = proposal.h * std::exp(v.vh);
  if (!std::isfinite(w) || !std::isfinite(h)) {
    fail(Status::Overflow, "exp overflow while decoding box size");
  }
  return make_rbox(proposal.cx + v.vx * proposal.w,
                   proposal.cy + v.vy * proposal.h, w, h,
                   proposal.theta + v.vtheta);
}

SampleBatch sample_rois(std::span<const RBox> proposals,
                        std::span<const GroundTruth> gts, std::uint64_t seed,
                        std::size_t batch_size, std::size_t max_positives) {
  std::vector<std::size_t> pos_idx;
  std::vector<std::size_t> neg_idx;
  std::vector<std::int64_t> matched(proposals.size(), -1);

  for (std::size_t i = 0; i < proposals.size(); ++i) {
    double best_iou = 0.0;
    std::int64_t best_gt = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double iou = rotated_iou(proposals[i], gts[g].box);
      if (iou > best_iou) {
        best_iou = iou;
        best_gt = static_cast<std::int64_t>(g);
      }
    }
    bool positive = false;
    if (best_gt >= 0 && best_iou > kIouGate) {
      const double dt = angle_diff(
          proposals[i].theta, gts[static_cast<std::size_t>(best_gt)].box.theta);
      positive = std::abs(dt) < kAngleGate;
    }
    if (positive) {
      matched[i] = best_gt;
      pos_idx.push_back(i);
    } else {
      neg_idx.push_back(i);
    }
  }

  std::mt19937_64 rng(seed);
  auto subsample = [&rng](std::vector<std::size_t>& idx, std::size_t want) {
    if (idx.size() <= want) return;
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(want);
    std::sort(idx.begin(), idx.end());
  };

  subsample(pos_idx, max_positives);
  subsample(neg_idx, batch_size - std::min(batch_size, pos_idx.size()));

  SampleBatch batch;
  batch.positives = pos_idx.size();
  batch.entries.reserve(pos_idx.size() + neg_idx.size());
  for (std::size_t i : pos_idx) {
    const auto& gt = gts[static_cast<std::size_t>(matched[i])];
    batch.entries.push_back(SampleEntry{proposals[i], true, matched[i],
                                        encode_target(proposals[i], gt.box)});
  }
  for (std::size_t i : neg_idx) {
    batch.entries.push_back(SampleEntry{proposals[i], false, -1, {}});
  }
  return batch;
}

}  // namespace rotext
