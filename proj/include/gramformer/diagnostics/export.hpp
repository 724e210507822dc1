// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "gramformer/model/model.hpp"

namespace gramformer::diagnostics {

std::string attention_filename(std::size_t layer, std::size_t head, std::size_t node);

/// Writes attention row `node` of every (layer, head) as a grid-shaped PGM,
/// min-max stretched to 16 bits. Returns the files in layer-major order.
std::vector<std::filesystem::path> export_attention(const model::ForwardTrace& trace, std::size_t node,
                                                    const std::filesystem::path& dir);

/// CSV "layer,rank,neighbor_id,grid_x,grid_y" of the node's neighbour set at
/// every layer, nearest first.
std::string neighbors_csv(const model::ForwardTrace& trace, std::size_t node);
void export_neighbors(const model::ForwardTrace& trace, std::size_t node, const std::filesystem::path& path);

}  // namespace gramformer::diagnostics
