// Copyright (c) 2026 The rotext authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rotext/manifest.hpp"
#include "rotext/postprocess.hpp"
#include "rotext/targets.hpp"

namespace rotext {

// Loads the level tensors named by the manifest, wires up the second-stage
// provider (file-backed when second_stage is present, otherwise a stub
// with v = 0 and s_d = the first-stage score), and runs the pipeline.
std::vector<Detection> run_inference(const RunManifest& m,
                                     unsigned threads = 1);

// Writes per-level classification (H x W) and regression (5 x H x W)
// tensors for the ground truth under out_dir as cls_p2.rten .. reg_p5.rten.
// Returns the written paths in level order.
std::vector<std::string> gen_target_files(std::span<const GroundTruth> gts,
                                          std::size_t image_w,
                                          std::size_t image_h, double shrink,
                                          const std::string& out_dir);

// Central finite-difference audit of one loss gradient.
struct GradCheckReport {
  std::string name;
  double max_rel_err = 0.0;
  bool pass = false;
};

inline constexpr double kGradCheckTol = 1e-4;

// Runs `trials` seeded random inputs per loss, comparing every analytic
// gradient entry against central differences (step 1e-5) away from
// non-smooth points. `fault` is a test hook added to one analytic entry so
// callers can prove the audit fails when gradients are wrong.
std::vector<GradCheckReport> loss_gradient_check(std::uint64_t seed,
                                                 std::size_t trials = 100,
                                                 double fault = 0.0);

}  // namespace rotext
