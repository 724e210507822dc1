// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/synthdata/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gramformer/numerics/errors.hpp"
#include "gramformer/synthdata/pgm.hpp"

namespace gramformer::synthdata {

namespace {

void append_double(std::string& out, double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, r.ptr);
}

double parse_double(std::string_view field, std::size_t line, std::size_t offset) {
  double v = 0.0;
  const auto r = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || r.ec != std::errc{} || r.ptr != field.data() + field.size()) {
    throw ParseError("points csv: malformed number '" + std::string(field) + "'", line, offset);
  }
  return v;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

std::string points_to_csv(std::span<const Point> points) {
  std::string out = "x,y\n";
  for (const Point& p : points) {
    append_double(out, p.x);
    out.push_back(',');
    append_double(out, p.y);
    out.push_back('\n');
  }
  return out;
}

std::vector<Point> points_from_csv(const std::string& text) {
  std::vector<Point> points;
  std::size_t pos = 0;
  std::size_t line = 0;
  while (pos < text.size()) {
    ++line;
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view row(text.data() + pos, end - pos);
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    const std::size_t offset = pos;
    pos = end + 1;
    if (line == 1) {
      if (row != "x,y") throw ParseError("points csv: expected header 'x,y'", line, offset);
      continue;
    }
    if (row.empty()) continue;
    const std::size_t comma = row.find(',');
    if (comma == std::string_view::npos) throw ParseError("points csv: expected two fields", line, offset);
    const double x = parse_double(row.substr(0, comma), line, offset);
    const double y = parse_double(row.substr(comma + 1), line, offset + comma + 1);
    points.push_back({x, y});
  }
  if (line == 0) throw ParseError("points csv: missing header", 1, 0);
  return points;
}

void save_scene(const std::filesystem::path& dir, const std::string& base, const SceneSample& scene) {
  write_pgm(dir / (base + ".image.pgm"), quantize_unit(scene.image));
  write_pgm(dir / (base + ".density.pgm"), quantize_scaled(scene.density));
  write_text(dir / (base + ".points.csv"), points_to_csv(scene.points));
}

SceneSample load_scene(const std::filesystem::path& dir, const std::string& base) {
  SceneSample scene;
  scene.image = dequantize(read_pgm(dir / (base + ".image.pgm")));
  scene.density = dequantize(read_pgm(dir / (base + ".density.pgm")));
  scene.points = points_from_csv(read_text(dir / (base + ".points.csv")));
  if (scene.image.dims() != scene.density.dims()) {
    throw ShapeError(base + ": image " + shape_string(scene.image.dims()) + " and density " +
                     shape_string(scene.density.dims()) + " differ in size");
  }
  return scene;
}

std::string scene_basename(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%05zu", index);
  return buf;
}

void save_dataset(const std::filesystem::path& dir, std::span<const SceneSample> scenes) {
  std::filesystem::create_directories(dir);
  std::string manifest;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const std::string base = scene_basename(i);
    save_scene(dir, base, scenes[i]);
    manifest += base + "\n";
  }
  write_text(dir / kManifestName, manifest);
}

std::vector<std::string> read_manifest(const std::filesystem::path& dir) {
  const std::string text = read_text(dir / kManifestName);
  std::vector<std::string> names;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) names.push_back(line);
  }
  return names;
}

std::vector<SceneSample> load_dataset(const std::filesystem::path& dir) {
  const auto names = read_manifest(dir);
  std::vector<SceneSample> scenes;
  scenes.reserve(names.size());
  for (const auto& name : names) scenes.push_back(load_scene(dir, name));
  return scenes;
}

}  // namespace gramformer::synthdata
