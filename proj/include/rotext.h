/* Copyright (c) 2026 The rotext authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the rotext rotated-text detection core. All functions
 * return a status code (ROTEXT_OK on success); rotext_last_error() gives a
 * thread-local message for the most recent failure on the calling thread.
 */

#ifndef ROTEXT_H
#define ROTEXT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(ROTEXT_BUILD)
#define ROTEXT_API __declspec(dllexport)
#else
#define ROTEXT_API __declspec(dllimport)
#endif
#else
#define ROTEXT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum {
  ROTEXT_OK = 0,
  ROTEXT_INVALID_ARGUMENT = 1,
  ROTEXT_IO = 2,
  ROTEXT_PARSE = 3,
  ROTEXT_INFEASIBLE = 4,
  ROTEXT_DEGENERATE = 5,
  ROTEXT_OVERFLOW = 6,
  ROTEXT_INTERNAL = 7
};

/* Rotated box: center, extents, angle in radians within [-pi/4, 3pi/4). */
typedef struct {
  double cx, cy, w, h, theta;
} rotext_rbox;

typedef struct {
  size_t true_positives, false_positives, false_negatives;
  double precision, recall, f_measure;
} rotext_eval_report;

typedef struct {
  char name[32];
  double max_rel_err;
  int pass;
} rotext_grad_report;

ROTEXT_API const char* rotext_version(void);
ROTEXT_API const char* rotext_last_error(void);
ROTEXT_API const char* rotext_status_name(int status);

/* ---- geometry kernels ---- */

ROTEXT_API int rotext_normalize_angle(double theta, double* out);
ROTEXT_API int rotext_rotated_iou(const rotext_rbox* a, const rotext_rbox* b,
                                  double* iou);
/* Edge distances (l,t,r,b) + theta at grid point (gx,gy) -> center box. */
ROTEXT_API int rotext_dist_to_center(const double ltrb_theta[5], double gx,
                                     double gy, rotext_rbox* out);
ROTEXT_API int rotext_center_to_dist(const rotext_rbox* box, double gx,
                                     double gy, double ltrb_theta[5]);

/* Greedy rotated NMS. kept must hold n entries; *kept_count receives the
 * number written, in descending-score keep order. */
ROTEXT_API int rotext_nms(const rotext_rbox* boxes, const double* scores,
                          size_t n, double iou_thresh, size_t* kept,
                          size_t* kept_count);

/* Rotated RoI Align over a C x H x W float map (row-major). out must hold
 * channels * out_h * out_w floats. */
ROTEXT_API int rotext_rroi_align(const float* map, size_t channels,
                                 size_t height, size_t width,
                                 double spatial_scale, const rotext_rbox* box,
                                 size_t out_h, size_t out_w, size_t samples,
                                 float* out);

/* CTC negative log-likelihood over a T x C row-major probability matrix
 * (blank is class C-1). grad may be NULL; otherwise it must hold T * C
 * doubles. */
ROTEXT_API int rotext_ctc_nll(const double* probs, size_t timesteps,
                              size_t num_classes, const int* label,
                              size_t label_len, double* value, double* grad);

/* ---- file-level operations ---- */

typedef struct rotext_detections rotext_detections;

/* Runs the full pipeline described by a JSON manifest. config_json_overrides
 * may be NULL or a JSON object whose keys (t_d, t_r, nms_iou, score_thresh,
 * topk, base_size, final_nms) replace the manifest values. */
ROTEXT_API int rotext_infer(const char* manifest_path,
                            const char* config_json_overrides,
                            unsigned threads, rotext_detections** out);

ROTEXT_API size_t rotext_detections_count(const rotext_detections* dets);
/* transcript stays owned by dets and is valid until rotext_detections_free. */
ROTEXT_API int rotext_detections_get(const rotext_detections* dets,
                                     size_t index, rotext_rbox* box,
                                     double* s_d, double* s_r,
                                     const char** transcript);
ROTEXT_API int rotext_detections_write(const rotext_detections* dets,
                                       const char* path);
ROTEXT_API void rotext_detections_free(rotext_detections* dets);

/* Writes per-level classification/regression target tensors for a ground
 * truth file into out_dir. */
ROTEXT_API int rotext_gen_targets(const char* gt_path, size_t image_w,
                                  size_t image_h, double shrink,
                                  const char* out_dir);

/* IoU-thresholded greedy matching between a detections file and a ground
 * truth file. */
ROTEXT_API int rotext_evaluate_files(const char* det_path, const char* gt_path,
                                     double iou_thresh,
                                     rotext_eval_report* out);

/* Finite-difference audit of all loss gradients. reports must hold cap
 * entries; *count receives the number written. fault is a test hook added
 * to one analytic gradient entry per loss. */
ROTEXT_API int rotext_loss_check(uint64_t seed, size_t trials, double fault,
                                 rotext_grad_report* reports, size_t cap,
                                 size_t* count);

#ifdef __cplusplus
}
#endif

#endif /* ROTEXT_H */
