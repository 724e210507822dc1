// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gramformer/synthdata/scene.hpp"

namespace gramformer::synthdata {

inline constexpr const char* kManifestName = "manifest.txt";

std::string points_to_csv(std::span<const Point> points);
/// Throws ParseError with the offending line.
std::vector<Point> points_from_csv(const std::string& text);

/// Writes <base>.image.pgm, <base>.density.pgm and <base>.points.csv.
void save_scene(const std::filesystem::path& dir, const std::string& base, const SceneSample& scene);
SceneSample load_scene(const std::filesystem::path& dir, const std::string& base);

std::string scene_basename(std::size_t index);

/// Writes every scene plus a manifest listing their basenames in order.
void save_dataset(const std::filesystem::path& dir, std::span<const SceneSample> scenes);
std::vector<std::string> read_manifest(const std::filesystem::path& dir);
std::vector<SceneSample> load_dataset(const std::filesystem::path& dir);

}  // namespace gramformer::synthdata
