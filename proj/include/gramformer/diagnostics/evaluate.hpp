// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "gramformer/diagnostics/anvar.hpp"
#include "gramformer/diagnostics/metrics.hpp"
#include "gramformer/model/model.hpp"
#include "gramformer/synthdata/scene.hpp"

namespace gramformer::diagnostics {

struct Evaluation {
  std::vector<double> predicted;
  std::vector<double> truth;
  ErrorReport errors;
  AnvarReport anvar;
};

/// Predicted count is the sum of the output density; truth is the number of
/// annotated points. Deterministic.
Evaluation evaluate(model::GramformerModel& model, std::span<const synthdata::SceneSample> scenes);

/// {"anvar": ..., "mae": ..., "mse": ..., "nae": ...}
std::string to_json(const Evaluation& e);
/// Aligned human-readable summary.
std::string format_report(const Evaluation& e);

}  // namespace gramformer::diagnostics
