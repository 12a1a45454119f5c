// Copyright (c) 2026 The rotext authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rotext/geometry.hpp"
#include "rotext/postprocess.hpp"
#include "rotext/targets.hpp"

namespace rotext {

// Smallest-area enclosing rotated rectangle (rotating calipers over the
// convex hull), reported with theta in [-pi/4, pi/4) so equivalent vertex
// orders yield one representation. Errors on collinear input.
RBox min_area_rect(std::span<const Vec2> points);

// "x1,y1,...,x4,y4,s_d,s_r,transcript" with coordinates and scores to one
// and four decimals respectively; vertices come from box_vertices.
std::string format_detection_line(const Detection& d);

// Inverse of format_detection_line; the box is rebuilt as the min-area
// rectangle of the four vertices. The transcript keeps any commas.
Detection parse_detection_line(std::string_view line);

// "x1,y1,...,x4,y4,transcript"; the quad becomes a min-area rectangle.
GroundTruth parse_gt_line(std::string_view line);

// One entry per nonempty line; parse errors name the path and line number.
std::vector<GroundTruth> read_gt_file(const std::string& path);
std::vector<Detection> read_det_file(const std::string& path);
void write_det_file(const std::string& path, std::span<const Detection> dets);

}  // namespace rotext
