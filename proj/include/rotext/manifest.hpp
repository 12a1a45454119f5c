// Copyright (c) 2026 The rotext authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rotext/postprocess.hpp"

namespace rotext {

struct ManifestLevel {
  int stride = 0;
  std::string objectness;  // tensor path, relative to the manifest
  std::string regression;
};

// Per-proposal second-stage dumps, all keyed by NMS-survivor order:
// regression K x 5, scores K, probs K x T x C.
struct SecondStageFiles {
  std::string regression;
  std::string scores;
  std::string probs;
};

struct RunManifest {
  std::size_t image_width = 0;
  std::size_t image_height = 0;
  std::vector<ManifestLevel> levels;
  std::optional<SecondStageFiles> second_stage;
  std::string alphabet;
  FilterConfig config;  // defaults overlaid with the manifest's overrides
  std::filesystem::path base_dir;

  std::string resolve(const std::string& relative) const {
    return (base_dir / relative).string();
  }
};

// Parses and validates the JSON run description. Strides must be drawn
// from {4,8,16,32} without repeats; unknown keys are rejected so typos
// cannot silently fall back to defaults.
RunManifest read_manifest(const std::string& path);

}  // namespace rotext
