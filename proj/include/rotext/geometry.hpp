// Copyright (c) 2026 The rotext authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>

namespace rotext {

inline constexpr double kPi = 3.14159265358979323846;

// Lower bound of the canonical orientation range [-pi/4, 3*pi/4).
inline constexpr double kAngleLo = -kPi / 4.0;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Rotated rectangle as center, size and orientation. Angle is in radians
// and canonical boxes keep it within [-pi/4, 3*pi/4); a rectangle is
// invariant under pi rotation, so that range is exhaustive.
struct RBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  double theta = 0.0;
};

// Grid-relative box: distances from an anchor point to the left/top/right/
// bottom edges, measured along the box axes, plus orientation.
struct EdgeDist {
  double l = 0.0;
  double t = 0.0;
  double r = 0.0;
  double b = 0.0;
  double theta = 0.0;
};

// Vertices in image coordinates, ordered for a positive shoelace sum.
using Quad = std::array<Vec2, 4>;

// Wraps an angle into [-pi/4, 3*pi/4). Idempotent.
double normalize_angle(double theta);

// (a - b) wrapped into [-pi/2, pi/2) by adding a multiple of pi.
double angle_diff(double a, double b);

// Validates w, h > 0 and finiteness, normalizes theta.
RBox make_rbox(double cx, double cy, double w, double h, double theta);

// Edge-distance form at grid point (gx, gy) -> center form, evaluated as a
// 5x6 matrix product on (l, t, r, b, theta, 1). Rejects l+r <= 0 or
// t+b <= 0.
RBox dist_to_center(const EdgeDist& d, double gx, double gy);

// Inverse of dist_to_center. The grid point must lie strictly inside the
// box.
EdgeDist center_to_dist(const RBox& box, double gx, double gy);

// Offset of (px, py) expressed in the box frame (rotate by -theta about
// the center).
Vec2 box_frame_offset(const RBox& box, double px, double py);

// Closed point-in-box test.
bool contains_point(const RBox& box, double px, double py);

Quad box_vertices(const RBox& box);

// Signed shoelace area.
double quad_area(const Quad& q);

// Exact IoU of two rotated rectangles via convex polygon clipping.
// Symmetric in its arguments; degenerate intersections yield 0.
double rotated_iou(const RBox& a, const RBox& b);

}  // namespace rotext
