// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/diagnostics/export.hpp"

#include <fstream>
#include <stdexcept>

#include "gramformer/numerics/errors.hpp"
#include "gramformer/synthdata/pgm.hpp"

namespace gramformer::diagnostics {

namespace {

void check_node(const model::ForwardTrace& trace, std::size_t node) {
  if (node >= trace.grid.nodes()) {
    throw ContractError("node id " + std::to_string(node) + " out of range (N = " + std::to_string(trace.grid.nodes()) +
                        ")");
  }
}

}  // namespace

std::string attention_filename(std::size_t layer, std::size_t head, std::size_t node) {
  return "attn_l" + std::to_string(layer) + "_h" + std::to_string(head) + "_n" + std::to_string(node) + ".pgm";
}

std::vector<std::filesystem::path> export_attention(const model::ForwardTrace& trace, std::size_t node,
                                                    const std::filesystem::path& dir) {
  check_node(trace, node);
  if (trace.attention.empty()) throw ContractError("export_attention: trace holds no attention maps");
  std::filesystem::create_directories(dir);
  const std::size_t n = trace.grid.nodes();
  std::vector<std::filesystem::path> files;
  for (std::size_t l = 0; l < trace.attention.size(); ++l) {
    for (std::size_t s = 0; s < trace.attention[l].size(); ++s) {
      const Tensor& a = trace.attention[l][s];
      const auto row = a.values().subspan(node * n, n);
      const Tensor grid({trace.grid.height, trace.grid.width}, std::vector<double>(row.begin(), row.end()));
      files.push_back(dir / attention_filename(l, s, node));
      synthdata::write_pgm(files.back(), synthdata::quantize_minmax(grid));
    }
  }
  return files;
}

std::string neighbors_csv(const model::ForwardTrace& trace, std::size_t node) {
  check_node(trace, node);
  std::string out = "layer,rank,neighbor_id,grid_x,grid_y\n";
  for (std::size_t l = 0; l < trace.neighbors.size(); ++l) {
    const auto& set = trace.neighbors[l].at(node);
    for (std::size_t r = 0; r < set.size(); ++r) {
      const std::size_t j = set[r];
      out += std::to_string(l) + "," + std::to_string(r) + "," + std::to_string(j) + "," +
             std::to_string(trace.grid.col_of(j)) + "," + std::to_string(trace.grid.row_of(j)) + "\n";
    }
  }
  return out;
}

void export_neighbors(const model::ForwardTrace& trace, std::size_t node, const std::filesystem::path& path) {
  const std::string csv = neighbors_csv(trace, node);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << csv;
}

}  // namespace gramformer::diagnostics
