// Copyright (c) 2026 The rotext authors
// SPDX-License-Identifier: Apache-2.0

#include "rotext.h"

#include <cstdio>
#include <cstring>
#include <exception>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "rotext/error.hpp"
#include "rotext/eval.hpp"
#include "rotext/geometry.hpp"
#include "rotext/icdar.hpp"
#include "rotext/losses.hpp"
#include "rotext/manifest.hpp"
#include "rotext/postprocess.hpp"
#include "rotext/roi_align.hpp"
#include "rotext/runner.hpp"

namespace {

thread_local std::string g_last_error;

int set_error(int code, const char* what) {
  g_last_error = what;
  return code;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return ROTEXT_OK;
  } catch (const rotext::Error& e) {
    return set_error(static_cast<int>(e.status()), e.what());
  } catch (const std::exception& e) {
    return set_error(ROTEXT_INTERNAL, e.what());
  } catch (...) {
    return set_error(ROTEXT_INTERNAL, "unknown error");
  }
}

int require(bool ok, const char* what) {
  if (ok) return ROTEXT_OK;
  return set_error(ROTEXT_INVALID_ARGUMENT, what);
}

rotext::RBox to_core(const rotext_rbox& b) {
  return rotext::make_rbox(b.cx, b.cy, b.w, b.h, b.theta);
}

rotext_rbox from_core(const rotext::RBox& b) {
  return rotext_rbox{b.cx, b.cy, b.w, b.h, b.theta};
}

}  // namespace

struct rotext_detections {
  std::vector<rotext::Detection> items;
};

extern "C" {

const char* rotext_version(void) { return "rotext 1.0.0"; }

const char* rotext_last_error(void) { return g_last_error.c_str(); }

const char* rotext_status_name(int status) {
  if (status == ROTEXT_INTERNAL) return "internal";
  return rotext::status_name(static_cast<rotext::Status>(status));
}

int rotext_normalize_angle(double theta, double* out) {
  if (int rc = require(out != nullptr, "out is null")) return rc;
  return guarded([&] { *out = rotext::normalize_angle(theta); });
}

int rotext_rotated_iou(const rotext_rbox* a, const rotext_rbox* b,
                       double* iou) {
  if (int rc = require(a && b && iou, "null argument")) return rc;
  return guarded([&] { *iou = rotext::rotated_iou(to_core(*a), to_core(*b)); });
}

int rotext_dist_to_center(const double ltrb_theta[5], double gx, double gy,
                          rotext_rbox* out) {
  if (int rc = require(ltrb_theta && out, "null argument")) return rc;
  return guarded([&] {
    rotext::EdgeDist d{ltrb_theta[0], ltrb_theta[1], ltrb_theta[2],
                       ltrb_theta[3], ltrb_theta[4]};
    *out = from_core(rotext::dist_to_center(d, gx, gy));
  });
}

int rotext_center_to_dist(const rotext_rbox* box, double gx, double gy,
                          double ltrb_theta[5]) {
  if (int rc = require(box && ltrb_theta, "null argument")) return rc;
  return guarded([&] {
    rotext::EdgeDist d = rotext::center_to_dist(to_core(*box), gx, gy);
    ltrb_theta[0] = d.l;
    ltrb_theta[1] = d.t;
    ltrb_theta[2] = d.r;
    ltrb_theta[3] = d.b;
    ltrb_theta[4] = d.theta;
  });
}

int rotext_nms(const rotext_rbox* boxes, const double* scores, size_t n,
               double iou_thresh, size_t* kept, size_t* kept_count) {
  if (int rc = require((boxes && scores && kept && kept_count) || n == 0,
                       "null argument"))
    return rc;
  return guarded([&] {
    std::vector<rotext::RBox> bs(n);
    for (size_t i = 0; i < n; ++i) bs[i] = to_core(boxes[i]);
    std::vector<std::size_t> idx = rotext::rotated_nms(
        bs, std::span<const double>(scores, n), iou_thresh);
    for (size_t i = 0; i < idx.size(); ++i) kept[i] = idx[i];
    if (kept_count) *kept_count = idx.size();
  });
}

int rotext_rroi_align(const float* map, size_t channels, size_t height,
                      size_t width, double spatial_scale,
                      const rotext_rbox* box, size_t out_h, size_t out_w,
                      size_t samples, float* out) {
  if (int rc = require(map && box && out, "null argument")) return rc;
  return guarded([&] {
    rotext::FeatureMap fm;
    fm.channels = channels;
    fm.height = height;
    fm.width = width;
    fm.spatial_scale = spatial_scale;
    fm.data.assign(map, map + channels * height * width);
    rotext::PooledFeature pf =
        rotext::rroi_align(fm, to_core(*box), out_h, out_w, samples);
    std::memcpy(out, pf.data.data(), pf.data.size() * sizeof(float));
  });
}

int rotext_ctc_nll(const double* probs, size_t timesteps, size_t num_classes,
                   const int* label, size_t label_len, double* value,
                   double* grad) {
  if (int rc = require(probs && value && (label || label_len == 0),
                       "null argument"))
    return rc;
  return guarded([&] {
    rotext::ProbSeq seq;
    seq.timesteps = timesteps;
    seq.num_classes = num_classes;
    seq.p.assign(probs, probs + timesteps * num_classes);
    rotext::ScalarGrad r =
        rotext::ctc_nll(seq, std::span<const int>(label, label_len));
    *value = r.value;
    if (grad) std::memcpy(grad, r.grad.data(), r.grad.size() * sizeof(double));
  });
}

int rotext_infer(const char* manifest_path, const char* config_json_overrides,
                 unsigned threads, rotext_detections** out) {
  if (int rc = require(manifest_path && out, "null argument")) return rc;
  return guarded([&] {
    rotext::RunManifest m = rotext::read_manifest(manifest_path);
    if (config_json_overrides && *config_json_overrides) {
      nlohmann::json cfg;
      try {
        cfg = nlohmann::json::parse(config_json_overrides);
      } catch (const nlohmann::json::parse_error& e) {
        rotext::fail(rotext::Status::Parse,
                     std::string("config overrides: ") + e.what());
      }
      if (!cfg.is_object())
        rotext::fail(rotext::Status::Parse,
                     "config overrides must be a JSON object");
      for (const auto& [key, value] : cfg.items()) {
        try {
          if (key == "t_d")
            m.config.t_d = value.get<double>();
          else if (key == "t_r")
            m.config.t_r = value.get<double>();
          else if (key == "nms_iou")
            m.config.nms_iou = value.get<double>();
          else if (key == "score_thresh")
            m.config.score_thresh = value.get<double>();
          else if (key == "topk")
            m.config.topk = value.get<std::size_t>();
          else if (key == "base_size")
            m.config.base_size = value.get<double>();
          else if (key == "final_nms")
            m.config.final_nms = value.get<bool>();
          else
            rotext::fail(rotext::Status::InvalidArgument,
                         "unknown config override '" + key + "'");
        } catch (const nlohmann::json::exception&) {
          rotext::fail(rotext::Status::InvalidArgument,
                       "config override '" + key + "' has the wrong type");
        }
      }
      m.config.validate();
    }
    auto dets = std::make_unique<rotext_detections>();
    dets->items = rotext::run_inference(m, threads);
    *out = dets.release();
  });
}

size_t rotext_detections_count(const rotext_detections* dets) {
  return dets ? dets->items.size() : 0;
}

int rotext_detections_get(const rotext_detections* dets, size_t index,
                          rotext_rbox* box, double* s_d, double* s_r,
                          const char** transcript) {
  if (int rc = require(dets != nullptr, "dets is null")) return rc;
  if (int rc = require(index < dets->items.size(), "index out of range"))
    return rc;
  const rotext::Detection& d = dets->items[index];
  if (box) *box = from_core(d.box);
  if (s_d) *s_d = d.s_d;
  if (s_r) *s_r = d.s_r;
  if (transcript) *transcript = d.transcript.c_str();
  return ROTEXT_OK;
}

int rotext_detections_write(const rotext_detections* dets, const char* path) {
  if (int rc = require(dets && path, "null argument")) return rc;
  return guarded([&] { rotext::write_det_file(path, dets->items); });
}

void rotext_detections_free(rotext_detections* dets) { delete dets; }

int rotext_gen_targets(const char* gt_path, size_t image_w, size_t image_h,
                       double shrink, const char* out_dir) {
  if (int rc = require(gt_path && out_dir, "null argument")) return rc;
  return guarded([&] {
    std::vector<rotext::GroundTruth> gts = rotext::read_gt_file(gt_path);
    rotext::gen_target_files(gts, image_w, image_h, shrink, out_dir);
  });
}

int rotext_evaluate_files(const char* det_path, const char* gt_path,
                          double iou_thresh, rotext_eval_report* out) {
  if (int rc = require(det_path && gt_path && out, "null argument")) return rc;
  return guarded([&] {
    std::vector<rotext::Detection> dets = rotext::read_det_file(det_path);
    std::vector<rotext::GroundTruth> gts = rotext::read_gt_file(gt_path);
    rotext::EvalReport r = rotext::evaluate(dets, gts, iou_thresh);
    out->true_positives = r.true_positives;
    out->false_positives = r.false_positives;
    out->false_negatives = r.false_negatives;
    out->precision = r.precision;
    out->recall = r.recall;
    out->f_measure = r.f_measure;
  });
}

int rotext_loss_check(uint64_t seed, size_t trials, double fault,
                      rotext_grad_report* reports, size_t cap, size_t* count) {
  if (int rc = require(reports && count, "null argument")) return rc;
  return guarded([&] {
    std::vector<rotext::GradCheckReport> rs =
        rotext::loss_gradient_check(seed, trials, fault);
    if (cap < rs.size())
      rotext::fail(rotext::Status::InvalidArgument,
                   "report buffer holds " + std::to_string(cap) +
                       " entries, need " + std::to_string(rs.size()));
    for (size_t i = 0; i < rs.size(); ++i) {
      std::snprintf(reports[i].name, sizeof reports[i].name, "%s",
                    rs[i].name.c_str());
      reports[i].max_rel_err = rs[i].max_rel_err;
      reports[i].pass = rs[i].pass ? 1 : 0;
    }
    *count = rs.size();
  });
}

}  // extern "C"
