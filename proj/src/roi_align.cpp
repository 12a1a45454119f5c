// Copyright (c) 2026 The rotext authors
// SPDX-License-Identifier: Apache-2.0

#include "rotext/roi_align.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rotext/error.hpp"
#include "rotext/parallel.hpp"

namespace rotext {

void FeatureMap::validate() const {
  if (channels < 1 || height < 1 || width < 1)
    fail(Status::InvalidArgument, "feature map: empty dimensions");
  if (!(spatial_scale > 0.0))
    fail(Status::InvalidArgument, "feature map: spatial_scale must be > 0");
  if (data.size() != channels * height * width)
    fail(Status::InvalidArgument,
         "feature map: storage holds " + std::to_string(data.size()) +
             " values, expected " +
             std::to_string(channels * height * width));
}

namespace {

double sample_bilinear(const FeatureMap& m, std::size_t c, double x,
                       double y) {
  double fx = std::floor(x), fy = std::floor(y);
  auto x0 = static_cast<long>(fx), y0 = static_cast<long>(fy);
  double dx = x - fx, dy = y - fy;
  auto w = static_cast<long>(m.width), h = static_cast<long>(m.height);
  if (x0 >= 0 && y0 >= 0 && x0 + 1 < w && y0 + 1 < h) {
    // Factored lerp: exact on fields affine in x and y.
    auto ux = static_cast<std::size_t>(x0), uy = static_cast<std::size_t>(y0);
    double v00 = m.at(c, uy, ux), v01 = m.at(c, uy, ux + 1);
    double v10 = m.at(c, uy + 1, ux), v11 = m.at(c, uy + 1, ux + 1);
    double top = v00 + dx * (v01 - v00);
    double bot = v10 + dx * (v11 - v10);
    return top + dy * (bot - top);
  }
  // Border: taps outside the map read 0 (zero padding).
  double acc = 0.0;
  const double wx[2] = {1.0 - dx, dx};
  const double wy[2] = {1.0 - dy, dy};
  for (int iy = 0; iy < 2; ++iy) {
    long yy = y0 + iy;
    if (yy < 0 || yy >= h) continue;
    for (int ix = 0; ix < 2; ++ix) {
      long xx = x0 + ix;
      if (xx < 0 || xx >= w) continue;
      double weight = wy[iy] * wx[ix];
      if (weight != 0.0)
        acc += weight * m.at(c, static_cast<std::size_t>(yy),
                             static_cast<std::size_t>(xx));
    }
  }
  return acc;
}

enum class Pool { Mean, Max };

PooledFeature rroi_pool(const FeatureMap& map, const RBox& box,
                        std::size_t out_h, std::size_t out_w,
                        std::size_t samples, Pool pool) {
  map.validate();
  if (out_h < 1 || out_w < 1)
    fail(Status::InvalidArgument, "rroi: output dims must be >= 1");
  if (samples < 1)
    fail(Status::InvalidArgument, "rroi: samples_per_bin_axis must be >= 1");
  if (!(box.w > 0.0) || !(box.h > 0.0) || !std::isfinite(box.cx) ||
      !std::isfinite(box.cy) || !std::isfinite(box.theta))
    fail(Status::Degenerate, "rroi: degenerate box");

  // Work in map coordinates throughout.
  double scale = map.spatial_scale;
  double cx = box.cx * scale, cy = box.cy * scale;
  double bw = box.w * scale, bh = box.h * scale;
  double c = std::cos(box.theta), s = std::sin(box.theta);

  double bin_w = bw / static_cast<double>(out_w);
  double bin_h = bh / static_cast<double>(out_h);
  double step = 1.0 / static_cast<double>(samples);
  double inv_count = 1.0 / static_cast<double>(samples * samples);

  PooledFeature out;
  out.channels = map.channels;
  out.out_h = out_h;
  out.out_w = out_w;
  out.data.resize(map.channels * out_h * out_w);

  for (std::size_t ch = 0; ch < map.channels; ++ch) {
    for (std::size_t i = 0; i < out_h; ++i) {
      double v0 = -bh / 2.0 + static_cast<double>(i) * bin_h;
      for (std::size_t j = 0; j < out_w; ++j) {
        double u0 = -bw / 2.0 + static_cast<double>(j) * bin_w;
        double acc = pool == Pool::Max
                         ? -std::numeric_limits<double>::infinity()
                         : 0.0;
        for (std::size_t a = 0; a < samples; ++a) {
          double v = v0 + (static_cast<double>(a) + 0.5) * step * bin_h;
          for (std::size_t b = 0; b < samples; ++b) {
            double u = u0 + (static_cast<double>(b) + 0.5) * step * bin_w;
            double x = cx + u * c - v * s;
            double y = cy + u * s + v * c;
            double val = sample_bilinear(map, ch, x, y);
            if (pool == Pool::Max)
              acc = std::max(acc, val);
            else
              acc += val;
          }
        }
        out.data[(ch * out_h + i) * out_w + j] =
            static_cast<float>(pool == Pool::Max ? acc : acc * inv_count);
      }
    }
  }
  return out;
}

}  // namespace

PooledFeature rroi_align(const FeatureMap& map, const RBox& box,
                         std::size_t out_h, std::size_t out_w,
                         std::size_t samples_per_bin_axis) {
  return rroi_pool(map, box, out_h, out_w, samples_per_bin_axis, Pool::Mean);
}

PooledFeature rroi_pool_max(const FeatureMap& map, const RBox& box,
                            std::size_t out_h, std::size_t out_w) {
  return rroi_pool(map, box, out_h, out_w, 2, Pool::Max);
}

std::vector<PooledFeature> rroi_align_batch(const FeatureMap& map,
                                            std::span<const RBox> boxes,
                                            std::size_t out_h,
                                            std::size_t out_w,
                                            std::size_t samples_per_bin_axis,
                                            unsigned threads) {
  std::vector<PooledFeature> out(boxes.size());
  parallel_chunks(boxes.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      out[i] = rroi_align(map, boxes[i], out_h, out_w, samples_per_bin_axis);
  });
  return out;
}

}  // namespace rotext
