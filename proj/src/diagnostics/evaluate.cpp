// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/diagnostics/evaluate.hpp"

#include <cstdio>

#include <json.hpp>

#include "gramformer/numerics/errors.hpp"

namespace gramformer::diagnostics {

Evaluation evaluate(model::GramformerModel& model, std::span<const synthdata::SceneSample> scenes) {
  if (scenes.empty()) throw ContractError("evaluate: empty dataset");
  Evaluation e;
  AnvarAccumulator acc;
  for (const auto& scene : scenes) {
    Tape tape;
    const Tensor image = scene.image.reshaped({1, scene.image.dim(0), scene.image.dim(1)});
    const model::ForwardResult r = model.forward(tape, image);
    double total = 0.0;
    for (double v : r.density.value().values()) total += v;
    e.predicted.push_back(total);
    e.truth.push_back(static_cast<double>(scene.count()));
    acc.add(r.trace);
  }
  e.errors = error_metrics(e.predicted, e.truth);
  e.anvar = acc.report();
  return e;
}

std::string to_json(const Evaluation& e) {
  nlohmann::ordered_json j;
  j["anvar"] = e.anvar.overall;
  j["mae"] = e.errors.mae;
  j["mse"] = e.errors.mse;
  j["nae"] = e.errors.nae;
  return j.dump(2) + "\n";
}

std::string format_report(const Evaluation& e) {
  std::string out;
  char buf[160];
  auto line = [&](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "%-10s %14.6f\n", key, v);
    out += buf;
  };
  std::snprintf(buf, sizeof(buf), "%-10s %14zu\n", "scenes", e.errors.samples);
  out += buf;
  line("mae", e.errors.mae);
  line("mse", e.errors.mse);
  line("nae", e.errors.nae);
  line("anvar", e.anvar.overall);
  if (e.errors.nae_excluded > 0) {
    std::snprintf(buf, sizeof(buf), "note: %zu scene(s) with zero count left out of nae\n", e.errors.nae_excluded);
    out += buf;
  }
  if (e.anvar.degenerate()) out += "note: every attention row summed to zero; anvar is undefined\n";
  for (std::size_t l = 0; l < e.anvar.per_head.size(); ++l) {
    for (std::size_t s = 0; s < e.anvar.per_head[l].size(); ++s) {
      std::snprintf(buf, sizeof(buf), "  anvar layer %zu head %zu %12.6f\n", l, s, e.anvar.per_head[l][s]);
      out += buf;
    }
  }
  return out;
}

}  // namespace gramformer::diagnostics
