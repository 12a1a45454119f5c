// Copyright (c) 2026 The rotext authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rotext/geometry.hpp"

namespace rotext {

enum class Level : int { P2 = 0, P3 = 1, P4 = 2, P5 = 3 };

inline constexpr int kNumLevels = 4;
inline constexpr double kDefaultShrink = 0.7;

int stride_of(Level level);          // P2->4 ... P5->32
Level level_from_stride(int stride)  /* throws on unknown stride */;
const char* level_name(Level level);

// Area buckets (0,64^2] -> P2, (64^2,128^2] -> P3, (128^2,256^2] -> P4,
// (256^2,inf) -> P5.
Level assign_level(const RBox& box);

struct LevelSpec {
  Level level = Level::P2;
  int stride = 4;
  std::size_t height = 0;  // grid cells
  std::size_t width = 0;
};

// Grid shapes for an image, ceil-divided by each level stride.
std::array<LevelSpec, kNumLevels> make_level_specs(std::size_t image_w,
                                                   std::size_t image_h);

// Image-space coordinates of the center of grid cell (row, col).
inline Vec2 cell_center(const LevelSpec& spec, std::size_t row,
                        std::size_t col) {
  return Vec2{(static_cast<double>(col) + 0.5) * spec.stride,
              (static_cast<double>(row) + 0.5) * spec.stride};
}

struct GroundTruth {
  RBox box;
  std::string transcript;  // may be empty for detection-only data
};

// Scales w and h about the same center and angle. Requires 0 < factor <= 1.
RBox shrink_box(const RBox& box, double factor);

// Binary objectness map: cell is 1 iff its center lies inside the shrunk
// polygon of some ground-truth box assigned to this level.
std::vector<std::uint8_t> gen_cls_map(std::span<const GroundTruth> gts,
                                      const LevelSpec& spec,
                                      double shrink = kDefaultShrink);

// 5 x H x W regression map of (l, t, r, b, theta) against the unshrunk
// owner box; zeros at non-positive cells. When shrunk boxes overlap the
// smallest-area box wins.
std::vector<double> gen_reg_map(std::span<const GroundTruth> gts,
                                const LevelSpec& spec,
                                double shrink = kDefaultShrink);

// Encoded box difference between a proposal and its ground truth.
struct RegressionTarget {
  double vx = 0.0;
  double vy = 0.0;
  double vw = 0.0;
  double vh = 0.0;
  double vtheta = 0.0;  // wrapped into [-pi/2, pi/2)
};

// vx=(x*-x)/w, vy=(y*-y)/h, vw=ln(w*/w), vh=ln(h*/h),
// vtheta=angle_diff(theta*, theta).
RegressionTarget encode_target(const RBox& proposal, const RBox& gt);

// Inverse of encode_target. Errors on exp overflow.
RBox decode_target(const RBox& proposal, const RegressionTarget& v);

struct SampleEntry {
  RBox proposal;
  bool positive = false;
  std::int64_t gt_index = -1;  // matched ground truth; -1 for negatives
  RegressionTarget target;     // meaningful for positives only
};

struct SampleBatch {
  std::vector<SampleEntry> entries;
  std::size_t positives = 0;

  std::size_t size() const { return entries.size(); }
};

inline constexpr std::size_t kRoiBatchSize = 256;
inline constexpr std::size_t kRoiMaxPositives = kRoiBatchSize / 4;

// Second-stage sampling. A proposal is positive iff its max-IoU ground
// truth has rotated IoU > 0.6 and absolute angle difference < pi/6. At
// most `max_positives` positives are kept and the batch is filled to
// `batch_size` with negatives, both uniformly subsampled under the seed.
SampleBatch sample_rois(std::span<const RBox> proposals,
                        std::span<const GroundTruth> gts, std::uint64_t seed,
                        std::size_t batch_size = kRoiBatchSize,
                        std::size_t max_positives = kRoiMaxPositives);

}  // namespace rotext
