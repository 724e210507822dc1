// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/cli/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "gramformer/cli/key_value.hpp"
#include "gramformer/model/checkpoint.hpp"
#include "gramformer/numerics/errors.hpp"
#include "gramformer/synthdata/dataset.hpp"

namespace gramformer::cli {

namespace fs = std::filesystem;

DataPaths resolve_data(const fs::path& root) {
  if (fs::exists(root / "train" / synthdata::kManifestName)) {
    if (!fs::exists(root / "test" / synthdata::kManifestName)) {
      throw ContractError("dataset " + root.string() + " has train/ but no test/");
    }
    return {root / "train", root / "test"};
  }
  if (!fs::exists(root / synthdata::kManifestName)) {
    throw ContractError("no dataset manifest under " + root.string());
  }
  return {root, root};
}

DataSplit load_split(const DataPaths& paths) {
  DataSplit split;
  split.train = synthdata::load_dataset(paths.train);
  split.test = paths.test == paths.train ? split.train : synthdata::load_dataset(paths.test);
  return split;
}

std::vector<model::TrainingExample> make_examples(std::span<const synthdata::SceneSample> scenes, std::size_t stride) {
  std::vector<model::TrainingExample> out;
  out.reserve(scenes.size());
  for (const auto& s : scenes) out.push_back(model::make_example(s.image, s.density, stride, static_cast<double>(s.count())));
  return out;
}

std::string metrics_csv(std::span<const MetricRow> rows) {
  std::string out = "iter,loss,Q,mae\n";
  for (const auto& r : rows) {
    out += std::to_string(r.iter) + "," + format_double(r.loss) + "," + format_double(r.q) + "," + format_double(r.mae) + "\n";
  }
  return out;
}

namespace {

void check_data(const RunConfig& config, const DataSplit& data) {
  if (data.train.empty()) throw ContractError("training set is empty");
  if (data.test.empty()) throw ContractError("test set is empty");
  for (const auto* set : {&data.train, &data.test}) {
    for (const auto& s : *set) {
      const std::size_t h = s.image.dim(0), w = s.image.dim(1);
      if (h % config.model.patch != 0 || w % config.model.patch != 0) {
        throw ContractError("image " + std::to_string(h) + "x" + std::to_string(w) + " is not divisible by patch " +
                            std::to_string(config.model.patch));
      }
      if ((h / config.model.patch) * (w / config.model.patch) < 2) throw ContractError("images yield fewer than 2 nodes");
    }
  }
}

double test_mae(model::GramformerModel& m, std::span<const model::TrainingExample> test) {
  double total = 0.0;
  for (const auto& ex : test) total += std::fabs(model::predict_count(m, ex.image) - ex.count);
  return total / static_cast<double>(test.size());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
}

}  // namespace

RunResult train_and_evaluate(const RunConfig& config, const DataSplit& data, const RunOutputs& outputs) {
  config.validate();
  check_data(config, data);
  if (outputs.dir) {
    fs::create_directories(*outputs.dir);
    save_run_config(*outputs.dir / "config.txt", config);
  }

  const std::size_t stride = config.model.density_stride();
  const auto train = make_examples(data.train, stride);
  const auto test = make_examples(data.test, stride);

  RunResult result{{}, model::GramformerModel::create(config.model, config.seed), {}, 0.0, std::nullopt};
  model::GramformerModel& m = result.final_model;
  result.best_params = m.params();
  bool have_best = false;

  model::Trainer trainer(m, config.train_options());
  model::SampleOrder order(train.size(), config.seed);
  double loss_sum = 0.0, q_sum = 0.0;
  std::size_t window = 0;
  for (std::size_t it = 1; it <= config.iterations; ++it) {
    const model::StepStats st = trainer.step(train[order.next()]);
    loss_sum += st.loss;
    q_sum += st.regularization;
    ++window;
    const bool log = (config.eval_interval > 0 && it % config.eval_interval == 0) || it == config.iterations;
    if (!log) continue;
    MetricRow row{it, loss_sum / static_cast<double>(window), q_sum / static_cast<double>(window), test_mae(m, test)};
    result.metrics.push_back(row);
    loss_sum = q_sum = 0.0;
    window = 0;
    if (!have_best || row.mae < result.best_mae) {
      have_best = true;
      result.best_mae = row.mae;
      result.best_params = m.params();
    }
  }
  if (!have_best) result.best_mae = test_mae(m, test);

  if (outputs.dir) {
    write_text(*outputs.dir / "metrics.csv", metrics_csv(result.metrics));
    model::save_checkpoint(*outputs.dir / "best.ckpt", result.best_params);
    model::save_checkpoint(*outputs.dir / "final.ckpt", m.params());
  }
  if (outputs.evaluate_final) result.evaluation = diagnostics::evaluate(m, data.test);
  return result;
}

RunConfig variant_config(const RunConfig& base, model::Variant variant, const CompareOptions& options) {
  RunConfig c = base;
  c.model.variant = variant;
  if (options.no_ewr) c.model.use_ewr = false;
  if (options.no_centrality) c.model.use_centrality = false;
  if (options.lambda) c.model.lambda = *options.lambda;
  return c;
}

Spread spread(std::span<const double> values) {
  Spread s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

CompareResult run_compare(const RunConfig& base, const DataSplit& data, const CompareOptions& options) {
  if (options.seeds == 0) throw ContractError("compare: --seeds must be at least 1");
  if (options.variants.empty()) throw ContractError("compare: no variants given");
  CompareResult result;
  for (auto v : options.variants) {
    for (std::size_t i = 0; i < options.seeds; ++i) result.runs.push_back({v, base.seed + i, {}, 0.0});
  }
  for (const auto& run : result.runs) variant_config(base, run.variant, options).validate();

  const auto n = static_cast<long>(result.runs.size());
  const int jobs = static_cast<int>(std::max<std::size_t>(1, options.jobs));
  std::vector<std::string> errors(result.runs.size());
#pragma omp parallel for schedule(dynamic) num_threads(jobs) if (jobs > 1)
  for (long i = 0; i < n; ++i) {
    auto& run = result.runs[static_cast<std::size_t>(i)];
    try {
      RunConfig c = variant_config(base, run.variant, options);
      c.seed = run.seed;
      const RunResult r = train_and_evaluate(c, data);
      run.errors = r.evaluation->errors;
      run.anvar = r.evaluation->anvar.overall;
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw std::runtime_error("compare: " + e);
  }

  for (auto v : options.variants) {
    std::vector<double> mae, mse, anvar;
    for (const auto& run : result.runs) {
      if (run.variant != v) continue;
      mae.push_back(run.errors.mae);
      mse.push_back(run.errors.mse);
      anvar.push_back(run.anvar);
    }
    result.summary.push_back({v, mae.size(), spread(mae), spread(mse), spread(anvar)});
  }
  return result;
}

std::string format_compare_table(const CompareResult& result) {
  std::string out;
  char buf[200];
  std::snprintf(buf, sizeof(buf), "%-12s %5s %22s %22s %22s\n", "variant", "runs", "mae", "mse", "anvar");
  out += buf;
  for (const auto& s : result.summary) {
    auto cell = [](const Spread& v) {
      char c[64];
      std::snprintf(c, sizeof(c), "%.4f ± %.4f", v.mean, v.std);
      return std::string(c);
    };
    std::snprintf(buf, sizeof(buf), "%-12s %5zu %22s %22s %22s\n", std::string(model::to_string(s.variant)).c_str(),
                  s.runs, cell(s.mae).c_str(), cell(s.mse).c_str(), cell(s.anvar).c_str());
    out += buf;
  }
  return out;
}

std::string compare_json(const CompareResult& result) {
  nlohmann::ordered_json j;
  j["runs"] = nlohmann::ordered_json::array();
  for (const auto& r : result.runs) {
    nlohmann::ordered_json row;
    row["variant"] = std::string(model::to_string(r.variant));
    row["seed"] = r.seed;
    row["anvar"] = r.anvar;
    row["mae"] = r.errors.mae;
    row["mse"] = r.errors.mse;
    row["nae"] = r.errors.nae;
    j["runs"].push_back(row);
  }
  j["summary"] = nlohmann::ordered_json::array();
  for (const auto& s : result.summary) {
    nlohmann::ordered_json row;
    row["variant"] = std::string(model::to_string(s.variant));
    row["runs"] = s.runs;
    for (const auto& [key, v] : {std::pair{"mae", s.mae}, std::pair{"mse", s.mse}, std::pair{"anvar", s.anvar}}) {
      row[key] = {{"mean", v.mean}, {"std", v.std}};
    }
    j["summary"].push_back(row);
  }
  return j.dump(2) + "\n";
}

model::ModelConfig gradcheck_model_config(const model::ModelConfig& base) {
  model::ModelConfig c = base;
  c.channels = 8;
  c.heads = 2;
  c.layers = 2;
  c.patch = 8;
  c.validate();
  return c;
}

GradCheckReport model_gradcheck(const RunConfig& config, std::uint64_t seed, const std::string& inject_op) {
  const model::ModelConfig mc = gradcheck_model_config(config.model);
  synthdata::SceneSpec spec;
  spec.width = spec.height = 32;
  spec.band_expected = {4.0, 3.0};
  const synthdata::SceneSample scene = synthdata::generate_scene(spec, seed);
  const model::TrainingExample ex =
      model::make_example(scene.image, scene.density, mc.density_stride(), static_cast<double>(scene.count()));

  model::GramformerModel m = model::GramformerModel::create(mc, seed);
  model::perturb_parameters(m.params(), 0.05, seed);
  std::function<void(Tape&)> prepare;
  if (!inject_op.empty()) prepare = [inject_op](Tape& t) { t.inject_backward_fault(inject_op, 2.0); };
  return grad_check(model::make_gradcheck_target(m, ex, config.loss, prepare));
}

}  // namespace gramformer::cli
