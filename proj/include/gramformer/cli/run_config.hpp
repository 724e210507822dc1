// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gramformer/model/config.hpp"
#include "gramformer/model/trainer.hpp"
#include "gramformer/synthdata/scene.hpp"

namespace gramformer::cli {

enum class LrSchedule { constant, cosine };

/// Everything a training run needs. Every field has a default; see
/// run_config_keys() for the documented key list.
struct RunConfig {
  model::ModelConfig model;
  std::string train_data;  // empty: taken from --data
  std::string test_data;
  std::size_t iterations = 2000;
  std::size_t eval_interval = 200;  // 0: evaluate only after the last step
  std::uint64_t seed = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t warmup = 100;
  LrSchedule lr_schedule = LrSchedule::cosine;
  bool flip = true;
  std::string loss = "mse_count";
  std::string out_dir;  // empty: taken from --out

  /// Throws ContractError naming the first invalid field.
  void validate() const;
  model::TrainOptions train_options() const;

  bool operator==(const RunConfig&) const = default;
};

struct ConfigKey {
  std::string_view name;
  std::string_view doc;
};
const std::vector<ConfigKey>& run_config_keys();

/// Starts from defaults and applies every key in the text. Unknown keys and
/// malformed values throw ParseError with the line.
RunConfig parse_run_config(std::string_view text);
/// Every key, in run_config_keys() order. parse(format(c)) == c.
std::string format_run_config(const RunConfig& config);

RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const std::filesystem::path& path, const RunConfig& config);

/// Scene generator settings in the same key = value format. band_expected is
/// a comma-separated list, top band first.
synthdata::SceneSpec parse_scene_spec(std::string_view text);
std::string format_scene_spec(const synthdata::SceneSpec& spec);
synthdata::SceneSpec load_scene_spec(const std::filesystem::path& path);

}  // namespace gramformer::cli
