// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gramformer/cli/run_config.hpp"
#include "gramformer/diagnostics/evaluate.hpp"
#include "gramformer/model/model.hpp"
#include "gramformer/model/trainer.hpp"
#include "gramformer/numerics/gradcheck.hpp"
#include "gramformer/synthdata/scene.hpp"

namespace gramformer::cli {

struct DataSplit {
  std::vector<synthdata::SceneSample> train;
  std::vector<synthdata::SceneSample> test;
};

/// A root holding train/ and test/ datasets, or a single dataset used for
/// both.
struct DataPaths {
  std::filesystem::path train;
  std::filesystem::path test;
};
DataPaths resolve_data(const std::filesystem::path& root);
DataSplit load_split(const DataPaths& paths);

std::vector<model::TrainingExample> make_examples(std::span<const synthdata::SceneSample> scenes, std::size_t stride);

struct MetricRow {
  std::size_t iter = 0;
  double loss = 0.0;  // mean total loss since the previous row
  double q = 0.0;     // mean edge regularization since the previous row
  double mae = 0.0;   // on the test split
};
std::string metrics_csv(std::span<const MetricRow> rows);

struct RunResult {
  std::vector<MetricRow> metrics;
  model::GramformerModel final_model;
  model::ParameterStore best_params;
  double best_mae = 0.0;
  std::optional<diagnostics::Evaluation> evaluation;  // of the final model on the test split
};

struct RunOutputs {
  /// When set: config.txt, metrics.csv, best.ckpt and final.ckpt go here.
  std::optional<std::filesystem::path> dir;
  bool evaluate_final = true;
};

/// Trains one model from scratch. The sample order and the augmentation
/// stream depend only on config.seed, so runs that differ only in model
/// settings see identical data.
RunResult train_and_evaluate(const RunConfig& config, const DataSplit& data, const RunOutputs& outputs = {});

struct CompareOptions {
  std::vector<model::Variant> variants;
  std::size_t seeds = 1;
  bool no_ewr = false;
  bool no_centrality = false;
  std::optional<double> lambda;
  std::size_t jobs = 1;  // runs trained concurrently
};

struct CompareRun {
  model::Variant variant;
  std::uint64_t seed = 0;
  diagnostics::ErrorReport errors;
  double anvar = 0.0;
};

struct Spread {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single run
};

struct CompareSummary {
  model::Variant variant;
  std::size_t runs = 0;
  Spread mae, mse, anvar;
};

struct CompareResult {
  std::vector<CompareRun> runs;  // variant-major, then seed
  std::vector<CompareSummary> summary;
};

/// The run configuration for one variant under the ablation switches.
RunConfig variant_config(const RunConfig& base, model::Variant variant, const CompareOptions& options);
CompareResult run_compare(const RunConfig& base, const DataSplit& data, const CompareOptions& options);
Spread spread(std::span<const double> values);
std::string format_compare_table(const CompareResult& result);
std::string compare_json(const CompareResult& result);

/// The small model used for gradient checking: 32×32 input, patch 8 (N = 16),
/// C = 8, S = 2, L = 2. Variant, ablation switches, q, m and λ come from
/// `base`.
model::ModelConfig gradcheck_model_config(const model::ModelConfig& base);

/// Finite-difference check of the total training loss of the tiny model on
/// one generated scene. Parameters are jittered off their zero-bias
/// initialisation first. A non-empty `inject_op` doubles that op's backward
/// pass.
GradCheckReport model_gradcheck(const RunConfig& config, std::uint64_t seed, const std::string& inject_op = "");

}  // namespace gramformer::cli
