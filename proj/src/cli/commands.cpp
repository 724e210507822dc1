// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "gramformer/cli/experiment.hpp"
#include "gramformer/cli/run_config.hpp"
#include "gramformer/diagnostics/export.hpp"
#include "gramformer/model/checkpoint.hpp"
#include "gramformer/numerics/errors.hpp"
#include "gramformer/numerics/gradcheck.hpp"
#include "gramformer/synthdata/dataset.hpp"

namespace gramformer::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

struct GenArgs {
  std::string spec, out;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
  const synthdata::SceneSpec spec = a.spec.empty() ? synthdata::SceneSpec{} : load_scene_spec(a.spec);
  spec.validate();
  const auto scenes = synthdata::generate_scenes(spec, a.n, a.seed);
  synthdata::save_dataset(a.out, scenes);
  std::size_t total = 0;
  for (const auto& s : scenes) total += s.count();
  out << "scenes " << scenes.size() << "  total count " << total << "  mean count "
      << fixed(scenes.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(scenes.size()), 2) << "\n";
  return kExitOk;
}

RunConfig load_config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : load_run_config(path);
}

DataPaths data_paths(const std::string& data_flag, const RunConfig& config) {
  if (!data_flag.empty()) return resolve_data(data_flag);
  if (!config.train_data.empty()) {
    return {config.train_data, config.test_data.empty() ? fs::path(config.train_data) : fs::path(config.test_data)};
  }
  throw UsageError("no dataset: pass --data or set train_data in the config");
}

struct TrainArgs {
  std::string config, data, out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iterations;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  RunConfig config = load_config_or_default(a.config);
  if (a.seed) config.seed = *a.seed;
  if (a.iterations) config.iterations = *a.iterations;
  const DataPaths paths = data_paths(a.data, config);
  config.train_data = paths.train.string();
  config.test_data = paths.test.string();
  if (!a.out.empty()) config.out_dir = a.out;
  if (config.out_dir.empty()) throw UsageError("no output directory: pass --out or set out_dir in the config");
  config.validate();
  const DataSplit data = load_split(paths);

  RunOutputs outputs;
  outputs.dir = fs::path(config.out_dir);
  outputs.evaluate_final = false;
  const RunResult r = train_and_evaluate(config, data, outputs);
  for (const auto& row : r.metrics) {
    out << "iter " << row.iter << "  loss " << fixed(row.loss) << "  Q " << fixed(row.q, 6) << "  mae " << fixed(row.mae)
        << "\n";
  }
  out << "best mae " << fixed(r.best_mae) << "; checkpoints in " << config.out_dir << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string checkpoint, data, config, json;
  std::optional<std::size_t> export_node;
  std::string export_dir;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const fs::path ckpt(a.checkpoint);
  RunConfig config;
  if (!a.config.empty()) {
    config = load_run_config(a.config);
  } else if (fs::exists(ckpt.parent_path() / "config.txt")) {
    config = load_run_config(ckpt.parent_path() / "config.txt");
  }
  config.validate();
  const DataPaths paths = data_paths(a.data, config);
  const auto test = synthdata::load_dataset(paths.test);

  model::GramformerModel m = model::GramformerModel::create(config.model, config.seed);
  model::load_checkpoint(ckpt, m.params());
  const diagnostics::Evaluation e = diagnostics::evaluate(m, test);
  out << diagnostics::format_report(e);
  const fs::path json = a.json.empty() ? ckpt.parent_path() / "eval.json" : fs::path(a.json);
  write_file(json, diagnostics::to_json(e));

  if (a.export_node) {
    const fs::path dir = a.export_dir.empty() ? ckpt.parent_path() / "export" : fs::path(a.export_dir);
    Tape tape;
    const auto& scene = test.front();
    const auto r = m.forward(tape, scene.image.reshaped({1, scene.image.dim(0), scene.image.dim(1)}));
    diagnostics::export_attention(r.trace, *a.export_node, dir);
    diagnostics::export_neighbors(r.trace, *a.export_node, dir / ("neighbors_n" + std::to_string(*a.export_node) + ".csv"));
    out << "exports for node " << *a.export_node << " in " << dir.string() << "\n";
  }
  return kExitOk;
}

struct CompareArgs {
  std::string config, data, variants = "gramformer,vanilla,graphormer", json;
  std::size_t seeds = 1;
  bool no_ewr = false, no_centrality = false;
  std::optional<double> lambda;
  std::size_t jobs = 1;
};

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  const RunConfig config = load_config_or_default(a.config);
  CompareOptions opts;
  std::stringstream ss(a.variants);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) opts.variants.push_back(model::parse_variant(item));
  }
  opts.seeds = a.seeds;
  opts.no_ewr = a.no_ewr;
  opts.no_centrality = a.no_centrality;
  opts.lambda = a.lambda;
  opts.jobs = a.jobs;
  const DataSplit data = load_split(data_paths(a.data, config));
  const CompareResult r = run_compare(config, data, opts);
  out << format_compare_table(r);
  if (!a.json.empty()) write_file(a.json, compare_json(r));
  return kExitOk;
}

struct GradcheckArgs {
  std::string config;
  std::uint64_t seed = 0;
  std::string inject_bug;
};

int cmd_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  const RunConfig config = load_config_or_default(a.config);
  const GradCheckReport report = model_gradcheck(config, a.seed, a.inject_bug);

  std::vector<ParamGradError> rows = report.params;
  std::sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) { return x.name < y.name; });
  char buf[160];
  for (const auto& p : rows) {
    std::snprintf(buf, sizeof(buf), "%-32s %6zu  rel %.3e\n", p.name.c_str(), p.entries, p.rel_error);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "worst %s rel %.3e (tolerance %.0e)\n",
                report.params.empty() ? "-" : report.params.front().name.c_str(), report.worst(), report.tolerance);
  out << buf << (report.passed() ? "PASS\n" : "FAIL\n");
  return report.passed() ? kExitOk : kExitVerificationFailed;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph-modulated transformer for crowd counting on synthetic scenes"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "generate a synthetic dataset");
  g->add_option("--spec", gen.spec, "scene spec file (key = value)");
  g->add_option("--out", gen.out, "output directory")->required();
  g->add_option("--n", gen.n, "number of scenes")->required();
  g->add_option("--seed", gen.seed, "dataset seed");

  TrainArgs train;
  std::uint64_t train_seed = 0;
  std::size_t train_iters = 0;
  auto* t = app.add_subcommand("train", "train one model");
  t->add_option("--config", train.config, "run config file");
  t->add_option("--data", train.data, "dataset root (with train/ and test/, or a single dataset)");
  t->add_option("--out", train.out, "output directory");
  auto* seed_opt = t->add_option("--seed", train_seed, "override the config seed");
  auto* iter_opt = t->add_option("--iterations", train_iters, "override the iteration count");

  EvalArgs eval;
  std::size_t export_node = 0;
  auto* e = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  e->add_option("--checkpoint", eval.checkpoint, "checkpoint file")->required();
  e->add_option("--data", eval.data, "dataset root");
  e->add_option("--config", eval.config, "run config (default: config.txt beside the checkpoint)");
  e->add_option("--json", eval.json, "JSON report path (default: eval.json beside the checkpoint)");
  auto* node_opt = e->add_option("--export-node", export_node, "write attention maps and neighbours of this node");
  e->add_option("--export-dir", eval.export_dir, "directory for exports");

  CompareArgs cmp;
  double cmp_lambda = 0.0;
  auto* c = app.add_subcommand("compare", "train and compare variants over several seeds");
  c->add_option("--config", cmp.config, "run config file");
  c->add_option("--data", cmp.data, "dataset root");
  c->add_option("--variants", cmp.variants, "comma-separated variant names");
  c->add_option("--seeds", cmp.seeds, "seeds per variant");
  c->add_flag("--no-ewr", cmp.no_ewr, "disable edge-weight regression");
  c->add_flag("--no-centrality", cmp.no_centrality, "disable centrality encoding");
  auto* lambda_opt = c->add_option("--lambda", cmp_lambda, "override the regularization weight");
  c->add_option("--jobs", cmp.jobs, "runs trained concurrently");
  c->add_option("--json", cmp.json, "write per-run results as JSON");

  GradcheckArgs gc;
  auto* k = app.add_subcommand("gradcheck", "finite-difference check of every parameter gradient");
  k->add_option("--config", gc.config, "run config file (model switches only)");
  k->add_option("--seed", gc.seed, "model and input seed");
  k->add_option("--inject-bug", gc.inject_bug, "scale the backward pass of this op by 2 (test hook)")->group("");

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (g->parsed()) return cmd_gen(gen, out);
    if (t->parsed()) {
      if (seed_opt->count() > 0) train.seed = train_seed;
      if (iter_opt->count() > 0) train.iterations = train_iters;
      return cmd_train(train, out);
    }
    if (e->parsed()) {
      if (node_opt->count() > 0) eval.export_node = export_node;
      return cmd_eval(eval, out);
    }
    if (c->parsed()) {
      if (lambda_opt->count() > 0) cmp.lambda = cmp_lambda;
      return cmd_compare(cmp, out);
    }
    if (k->parsed()) return cmd_gradcheck(gc, out);
  } catch (const std::exception& ex) {
    // Bad flags, configs, data, checkpoints and unwritable paths all land
    // here; exit code 1 is reserved for failed verification.
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace gramformer::cli
