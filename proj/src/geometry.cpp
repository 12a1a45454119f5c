// Copyright (c) 2026 The rotext authors
// SPDX-License-Identifier: Apache-2.0

#include "rotext/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "rotext/error.hpp"

namespace rotext {

namespace {

// Tolerance for near-collinear clip edges.
constexpr double kClipEps = 1e-9;

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

double normalize_angle(double theta) {
  double t = std::fmod(theta - kAngleLo, kPi);
  if (t < 0.0) t += kPi;
  return t + kAngleLo;
}

double angle_diff(double a, double b) {
  double d = std::fmod(a - b + kPi / 2.0, kPi);
  if (d < 0.0) d += kPi;
  return d - kPi / 2.0;
}

RBox make_rbox(double cx, double cy, double w, double h, double theta) {
  if (!std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(w) ||
      !std::isfinite(h) || !std::isfinite(theta)) {
    fail(Status::InvalidArgument, "box fields must be finite");
  }
  if (w <= 0.0 || h <= 0.0) {
    fail(Status::InvalidArgument, "box sides must be positive");
  }
  return RBox{cx, cy, w, h, normalize_angle(theta)};
}

RBox dist_to_center(const EdgeDist& d, double gx, double gy) {
  if (d.l < 0.0 || d.t < 0.0 || d.r < 0.0 || d.b < 0.0) {
    fail(Status::Degenerate, "edge distances must be non-negative");
  }
  if (d.l + d.r <= 0.0 || d.t + d.b <= 0.0) {
    fail(Status::Degenerate, "degenerate box: l+r and t+b must be positive");
  }
  const double c = std::cos(d.theta);
  const double s = std::sin(d.theta);
  const double gamma[5][6] = {
      {-c / 2.0, s / 2.0, c / 2.0, -s / 2.0, 0.0, gx},
      {-s / 2.0, -c / 2.0, s / 2.0, c / 2.0, 0.0, gy},
      {1.0, 0.0, 1.0, 0.0, 0.0, 0.0},
      {0.0, 1.0, 0.0, 1.0, 0.0, 0.0},
      {0.0, 0.0, 0.0, 0.0, 1.0, 0.0},
  };
  const double in[6] = {d.l, d.t, d.r, d.b, d.theta, 1.0};
  double out[5] = {0, 0, 0, 0, 0};
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 6; ++j) {
      out[i] += gamma[i][j] * in[j];
    }
  }
  return make_rbox(out[0], out[1], out[2], out[3], out[4]);
}

Vec2 box_frame_offset(const RBox& box, double px, double py) {
  const double c = std::cos(box.theta);
  const double s = std::sin(box.theta);
  const double dx = px - box.cx;
  const double dy = py - box.cy;
  return Vec2{dx * c + dy * s, -dx * s + dy * c};
}

bool contains_point(const RBox& box, double px, double py) {
  const Vec2 uv = box_frame_offset(box, px, py);
  return std::abs(uv.x) <= box.w / 2.0 && std::abs(uv.y) <= box.h / 2.0;
}

EdgeDist center_to_dist(const RBox& box, double gx, double gy) {
  const Vec2 uv = box_frame_offset(box, gx, gy);
  if (std::abs(uv.x) >= box.w / 2.0 || std::abs(uv.y) >= box.h / 2.0) {
    fail(Status::InvalidArgument, "grid point lies outside the box");
  }
  EdgeDist d;
  d.l = box.w / 2.0 + uv.x;
  d.r = box.w / 2.0 - uv.x;
  d.t = box.h / 2.0 + uv.y;
  d.b = box.h / 2.0 - uv.y;
  d.theta = box.theta;
  return d;
}

Quad box_vertices(const RBox& box) {
  const double c = std::cos(box.theta);
  const double s = std::sin(box.theta);
  const double hw = box.w / 2.0;
  const double hh = box.h / 2.0;
  const double fx[4] = {-hw, hw, hw, -hw};
  const double fy[4] = {-hh, -hh, hh, hh};
  Quad q;
  for (int i = 0; i < 4; ++i) {
    q[i].x = box.cx + fx[i] * c - fy[i] * s;
    q[i].y = box.cy + fx[i] * s + fy[i] * c;
  }
  return q;
}

double quad_area(const Quad& q) {
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Vec2& p = q[i];
    const Vec2& n = q[(i + 1) % 4];
    acc += p.x * n.y - n.x * p.y;
  }
  return acc / 2.0;
}

namespace {

// Clips `poly` (n vertices) against the half-plane left of edge a->b.
// Writes into `out`, returns the vertex count. The intersection of two
// quads never exceeds 8 vertices; 16 leaves slack for epsilon duplicates.
int clip_against_edge(const Vec2* poly, int n, const Vec2& a, const Vec2& b,
                      Vec2* out) {
  int m = 0;
  for (int i = 0; i < n; ++i) {
    const Vec2& cur = poly[i];
    const Vec2& nxt = poly[(i + 1) % n];
    const double side_cur = cross(a, b, cur);
    const double side_nxt = cross(a, b, nxt);
    const bool in_cur = side_cur >= -kClipEps;
    const bool in_nxt = side_nxt >= -kClipEps;
    if (in_cur) {
      out[m++] = cur;
    }
    if (in_cur != in_nxt) {
      const double denom = side_cur - side_nxt;
      if (std::abs(denom) > kClipEps) {
        const double t = side_cur / denom;
        out[m++] = Vec2{cur.x + t * (nxt.x - cur.x), cur.y + t * (nxt.y - cur.y)};
      }
    }
  }
  return m;
}

double intersection_area(const Quad& subject, const Quad& clip) {
  Vec2 buf_a[16];
  Vec2 buf_b[16];
  int n = 4;
  for (int i = 0; i < 4; ++i) buf_a[i] = subject[i];
  Vec2* cur = buf_a;
  Vec2* nxt = buf_b;
  for (int e = 0; e < 4 && n > 2; ++e) {
    n = clip_against_edge(cur, n, clip[e], clip[(e + 1) % 4], nxt);
    std::swap(cur, nxt);
  }
  if (n < 3) return 0.0;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec2& p = cur[i];
    const Vec2& q = cur[(i + 1) % n];
    acc += p.x * q.y - q.x * p.y;
  }
  return std::abs(acc) / 2.0;
}

}  // namespace

double rotated_iou(const RBox& a, const RBox& b) {
  // Canonical argument order makes the result bitwise symmetric.
  auto key = [](const RBox& x) {
    return std::tie(x.cx, x.cy, x.w, x.h, x.theta);
  };
  const RBox& lo = key(a) <= key(b) ? a : b;
  const RBox& hi = key(a) <= key(b) ? b : a;

  const double area_lo = lo.w * lo.h;
  const double area_hi = hi.w * hi.h;
  if (area_lo <= 0.0 || area_hi <= 0.0) return 0.0;

  const double inter = intersection_area(box_vertices(lo), box_vertices(hi));
  if (inter <= 0.0) return 0.0;
  const double uni = area_lo + area_hi - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

const char* status_name(Status s) {
  switch (s) {
    case Status::Ok:
      return "ok";
    case Status::InvalidArgument:
      return "invalid_argument";
    case Status::Io:
      return "io";
    case Status::Parse:
      return "parse";
    case Status::Infeasible:
      return "infeasible";
    case Status::Degenerate:
      return "degenerate";
    case Status::Overflow:
      return "overflow";
  }
  return "unknown";
}

}  // namespace rotext
