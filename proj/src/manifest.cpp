// Copyright (c) 2026 The rotext authors
// SPDX-License-Identifier: Apache-2.0

#include "rotext/manifest.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "rotext/error.hpp"
#include "rotext/targets.hpp"

namespace rotext {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  fail(Status::Parse, path + ": " + what);
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& path, const char* where) {
  if (!obj.is_object())
    bad(path, std::string(where) + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (key == a) {
        known = true;
        break;
      }
    if (!known)
      bad(path, std::string("unknown key '") + key + "' in " + where);
  }
}

template <typename T>
T get_field(const json& obj, const char* key, const std::string& path,
            const char* where) {
  auto it = obj.find(key);
  if (it == obj.end())
    bad(path, std::string("missing '") + key + "' in " + where);
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    bad(path, std::string("field '") + key + "' in " + where +
                  " has the wrong type");
  }
}

}  // namespace

RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Status::Io, "cannot open " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    bad(path, e.what());
  }
  if (!root.is_object()) bad(path, "top level must be an object");
  check_keys(root, {"image", "levels", "second_stage", "alphabet", "config"},
             path, "the manifest");

  RunManifest m;
  m.base_dir = std::filesystem::path(path).parent_path();

  json image = get_field<json>(root, "image", path, "the manifest");
  check_keys(image, {"width", "height"}, path, "image");
  m.image_width = get_field<std::size_t>(image, "width", path, "image");
  m.image_height = get_field<std::size_t>(image, "height", path, "image");
  if (m.image_width == 0 || m.image_height == 0)
    bad(path, "image dimensions must be positive");

  json levels = get_field<json>(root, "levels", path, "the manifest");
  if (!levels.is_array() || levels.empty())
    bad(path, "'levels' must be a nonempty array");
  std::set<int> seen;
  for (const json& lv : levels) {
    check_keys(lv, {"stride", "objectness", "regression"}, path, "a level");
    ManifestLevel ml;
    ml.stride = get_field<int>(lv, "stride", path, "a level");
    ml.objectness = get_field<std::string>(lv, "objectness", path, "a level");
    ml.regression = get_field<std::string>(lv, "regression", path, "a level");
    try {
      level_from_stride(ml.stride);
    } catch (const Error&) {
      bad(path, "stride " + std::to_string(ml.stride) +
                    " is not one of 4, 8, 16, 32");
    }
    if (!seen.insert(ml.stride).second)
      bad(path, "duplicate stride " + std::to_string(ml.stride));
    m.levels.push_back(std::move(ml));
  }

  if (auto it = root.find("second_stage"); it != root.end()) {
    check_keys(*it, {"regression", "scores", "probs"}, path, "second_stage");
    SecondStageFiles ss;
    ss.regression =
        get_field<std::string>(*it, "regression", path, "second_stage");
    ss.scores = get_field<std::string>(*it, "scores", path, "second_stage");
    ss.probs = get_field<std::string>(*it, "probs", path, "second_stage");
    m.second_stage = std::move(ss);
  }

  if (auto it = root.find("alphabet"); it != root.end()) {
    if (!it->is_string()) bad(path, "'alphabet' must be a string");
    m.alphabet = it->get<std::string>();
  }
  if (m.second_stage && m.alphabet.empty())
    bad(path, "second_stage requires a nonempty alphabet");

  if (auto it = root.find("config"); it != root.end()) {
    const json& cfg = *it;
    check_keys(cfg,
               {"t_d", "t_r", "nms_iou", "score_thresh", "topk", "base_size",
                "final_nms"},
               path, "config");
    auto overlay = [&](const char* key, auto& slot) {
      using T = std::decay_t<decltype(slot)>;
      if (cfg.contains(key)) slot = get_field<T>(cfg, key, path, "config");
    };
    overlay("t_d", m.config.t_d);
    overlay("t_r", m.config.t_r);
    overlay("nms_iou", m.config.nms_iou);
    overlay("score_thresh", m.config.score_thresh);
    overlay("topk", m.config.topk);
    overlay("base_size", m.config.base_size);
    overlay("final_nms", m.config.final_nms);
  }
  m.config.validate();

  for (const ManifestLevel& lv : m.levels) {
    for (const std::string& f : {lv.objectness, lv.regression})
      if (!std::filesystem::exists(m.resolve(f)))
        fail(Status::Io, path + ": referenced file " + m.resolve(f) +
                             " does not exist");
  }
  if (m.second_stage) {
    for (const std::string& f :
         {m.second_stage->regression, m.second_stage->scores,
          m.second_stage->probs})
      if (!std::filesystem::exists(m.resolve(f)))
        fail(Status::Io, path + ": referenced file " + m.resolve(f) +
                             " does not exist");
  }
  return m;
}

}  // namespace rotext
