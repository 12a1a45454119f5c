// Copyright (c) 2026 The rotext authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rotext/geometry.hpp"

namespace rotext {

// Dense C x H x W float map. spatial_scale converts image coordinates to
// map coordinates (e.g. 1/stride for a pyramid level).
struct FeatureMap {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  double spatial_scale = 1.0;
  std::vector<float> data;  // row-major [c][y][x]

  float at(std::size_t c, std::size_t y, std::size_t x) const {
    return data[(c * height + y) * width + x];
  }
  float& at(std::size_t c, std::size_t y, std::size_t x) {
    return data[(c * height + y) * width + x];
  }
  void validate() const;
};

struct PooledFeature {
  std::size_t channels = 0;
  std::size_t out_h = 0;
  std::size_t out_w = 0;
  std::vector<float> data;  // row-major [c][i][j]

  float at(std::size_t c, std::size_t i, std::size_t j) const {
    return data[(c * out_h + i) * out_w + j];
  }
};

inline constexpr std::size_t kDefaultSamplesPerBinAxis = 2;

// Splits the box into out_h x out_w equal bins along its own rotated axes,
// samples each bin on a samples^2 interior lattice (offsets (a+0.5)/s of
// the bin extent), bilinearly interpolates each sample at pixel centers
// (pixel (i,j) holds the value at coordinate x=j, y=i), and mean-pools the
// samples. Out-of-bounds taps read 0.
PooledFeature rroi_align(const FeatureMap& map, const RBox& box,
                         std::size_t out_h, std::size_t out_w,
                         std::size_t samples_per_bin_axis =
                             kDefaultSamplesPerBinAxis);

// Same binning with a fixed 2x2 lattice per bin and max pooling. Kept to
// contrast the older pooling behavior against align.
PooledFeature rroi_pool_max(const FeatureMap& map, const RBox& box,
                            std::size_t out_h, std::size_t out_w);

// Align over many proposals, parallelized across proposals.
std::vector<PooledFeature> rroi_align_batch(
    const FeatureMap& map, std::span<const RBox> boxes, std::size_t out_h,
    std::size_t out_w,
    std::size_t samples_per_bin_axis = kDefaultSamplesPerBinAxis,
    unsigned threads = 1);

}  // namespace rotext
