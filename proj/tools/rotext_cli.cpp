// Copyright (c) 2026 The rotext authors
// SPDX-License-Identifier: Apache-2.0
//
// Batch frontend over the C API: pipeline inference from a manifest,
// ground-truth target map generation, the loss gradient audit, and
// detection evaluation. Exit codes: 0 success, 1 validation failure,
// 2 I/O failure.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rotext.h"

namespace {

int exit_code_for(int status) { return status == ROTEXT_IO ? 2 : 1; }

int report_failure(int status) {
  std::cerr << "error (" << rotext_status_name(status)
            << "): " << rotext_last_error() << "\n";
  return exit_code_for(status);
}

struct InferArgs {
  std::string manifest;
  std::string output;
  double t_d = 0.7, t_r = 0.8, nms_iou = 0.3, score_thresh = 0.5;
  double base_size = 640.0;
  std::uint64_t topk = 1000;
  unsigned threads = 1;
  bool no_final_nms = false;
};

int run_infer(const CLI::App& cmd, const InferArgs& a) {
  nlohmann::json overrides = nlohmann::json::object();
  if (cmd.count("--t-d")) overrides["t_d"] = a.t_d;
  if (cmd.count("--t-r")) overrides["t_r"] = a.t_r;
  if (cmd.count("--nms-iou")) overrides["nms_iou"] = a.nms_iou;
  if (cmd.count("--score-thresh")) overrides["score_thresh"] = a.score_thresh;
  if (cmd.count("--topk")) overrides["topk"] = a.topk;
  if (cmd.count("--base-size")) overrides["base_size"] = a.base_size;
  if (a.no_final_nms) overrides["final_nms"] = false;
  std::string cfg = overrides.empty() ? std::string() : overrides.dump();

  rotext_detections* dets = nullptr;
  int rc = rotext_infer(a.manifest.c_str(), cfg.empty() ? nullptr : cfg.c_str(),
                        a.threads, &dets);
  if (rc != ROTEXT_OK) return report_failure(rc);
  rc = rotext_detections_write(dets, a.output.c_str());
  size_t n = rotext_detections_count(dets);
  rotext_detections_free(dets);
  if (rc != ROTEXT_OK) return report_failure(rc);
  std::cout << n << " detections -> " << a.output << "\n";
  return 0;
}

struct GenTargetsArgs {
  std::string gt_file;
  std::string out_dir;
  std::size_t width = 0, height = 0;
  double shrink = 0.7;
};

int run_gen_targets(const GenTargetsArgs& a) {
  int rc = rotext_gen_targets(a.gt_file.c_str(), a.width, a.height, a.shrink,
                              a.out_dir.c_str());
  if (rc != ROTEXT_OK) return report_failure(rc);
  std::cout << "target maps -> " << a.out_dir << "\n";
  return 0;
}

struct LossCheckArgs {
  std::uint64_t seed = 42;
  std::size_t trials = 100;
  double fault = 0.0;
};

int run_loss_check(const LossCheckArgs& a) {
  rotext_grad_report reports[16];
  size_t count = 0;
  int rc = rotext_loss_check(a.seed, a.trials, a.fault, reports, 16, &count);
  if (rc != ROTEXT_OK) return report_failure(rc);
  bool all_pass = true;
  for (size_t i = 0; i < count; ++i) {
    std::printf("%-14s max_rel_err=%.3e %s\n", reports[i].name,
                reports[i].max_rel_err, reports[i].pass ? "pass" : "FAIL");
    all_pass = all_pass && reports[i].pass;
  }
  return all_pass ? 0 : 1;
}

struct EvalArgs {
  std::string det_file;
  std::string gt_file;
  double iou = 0.5;
};

int run_eval(const EvalArgs& a) {
  rotext_eval_report r;
  int rc =
      rotext_evaluate_files(a.det_file.c_str(), a.gt_file.c_str(), a.iou, &r);
  if (rc != ROTEXT_OK) return report_failure(rc);
  nlohmann::json out{{"true_positives", r.true_positives},
                     {"false_positives", r.false_positives},
                     {"false_negatives", r.false_negatives},
                     {"precision", r.precision},
                     {"recall", r.recall},
                     {"f_measure", r.f_measure}};
  std::cout << out.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rotated scene-text detection toolkit"};
  app.set_version_flag("--version", rotext_version());
  app.require_subcommand(1);

  InferArgs ia;
  CLI::App* infer =
      app.add_subcommand("infer", "Run the detection pipeline on a manifest");
  infer->add_option("manifest", ia.manifest, "run manifest (JSON)")
      ->required();
  infer->add_option("output", ia.output, "detections output file")->required();
  infer->add_option("--t-d", ia.t_d, "detection keep threshold");
  infer->add_option("--t-r", ia.t_r, "recognition keep threshold");
  infer->add_option("--nms-iou", ia.nms_iou, "NMS IoU threshold");
  infer->add_option("--score-thresh", ia.score_thresh,
                    "first-stage proposal gate");
  infer->add_option("--topk", ia.topk, "per-level proposal cap");
  infer->add_option("--base-size", ia.base_size,
                    "scale of normalized edge distances");
  infer->add_option("--threads", ia.threads, "worker threads (0 = all cores)");
  infer->add_flag("--no-final-nms", ia.no_final_nms,
                  "skip the NMS pass after joint filtering");

  GenTargetsArgs ga;
  CLI::App* gen = app.add_subcommand(
      "gen-targets", "Write per-level training target tensors for a GT file");
  gen->add_option("gt_file", ga.gt_file, "ground truth file")->required();
  gen->add_option("out_dir", ga.out_dir, "output directory")->required();
  gen->add_option("--width", ga.width, "image width in pixels")->required();
  gen->add_option("--height", ga.height, "image height in pixels")->required();
  gen->add_option("--shrink", ga.shrink, "box shrink factor for positives");

  LossCheckArgs la;
  CLI::App* loss = app.add_subcommand(
      "loss-check", "Audit loss gradients against finite differences");
  loss->add_option("--seed", la.seed, "random seed");
  loss->add_option("--trials", la.trials, "random inputs per loss");
  loss->add_option("--inject-grad-fault", la.fault,
                   "test hook: offset added to one analytic gradient entry")
      ->group("");  // hidden

  EvalArgs ea;
  CLI::App* ev = app.add_subcommand(
      "eval", "Match a detections file against ground truth");
  ev->add_option("det_file", ea.det_file, "detections file")->required();
  ev->add_option("gt_file", ea.gt_file, "ground truth file")->required();
  ev->add_option("--iou", ea.iou, "match IoU threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // help/version exit 0, misuse is validation
  }

  if (*infer) return run_infer(*infer, ia);
  if (*gen) return run_gen_targets(ga);
  if (*loss) return run_loss_check(la);
  if (*ev) return run_eval(ea);
  return 1;
}
