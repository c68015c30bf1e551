// Copyright 2026 The flowstab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FLOWSTAB_SBM_HPP_
#define FLOWSTAB_SBM_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"
#include "graph.hpp"
#include "partition.hpp"

namespace flowstab {

/// Blocks of the coupled double source-core-sink model, in generation order.
enum Block : std::size_t { Sources1 = 0, Core1, Sinks1, Sources2, Core2, Sinks2 };

inline constexpr std::size_t kBlocks = 6;

using BlockMatrix = std::array<std::array<double, kBlocks>, kBlocks>;

struct SbmSpec {
    std::size_t nTotal = 200;
    /// Empty means an even split of nTotal (see defaultBlockSizes).
    std::vector<std::size_t> blockSizes;
    double pIn = 0.1;
    double pOut = 0.2;
    double pCore = 0.4;
    /// Cross-group source->core and core->sink probability; pOut/4 if unset.
    std::optional<double> coupling;
    std::uint64_t seed = 0;

    double effectiveCoupling() const { return coupling ? *coupling : pOut / 4.0; }
};

/// Near-even split; leftover nodes go to the cores first, then the source
/// groups, then the sink groups. For 200 nodes: 33,34,33,33,34,33.
inline std::vector<std::size_t> defaultBlockSizes(std::size_t n) {
    std::vector<std::size_t> sizes(kBlocks, n / kBlocks);
    constexpr std::array<std::size_t, kBlocks> priority{Core1, Core2, Sources1, Sources2, Sinks1, Sinks2};
    for (std::size_t r = 0; r < n % kBlocks; ++r)
        ++sizes[priority[r]];
    return sizes;
}

inline std::vector<std::size_t> resolvedBlockSizes(const SbmSpec &spec) {
    std::vector<std::size_t> sizes = spec.blockSizes.empty() ? defaultBlockSizes(spec.nTotal) : spec.blockSizes;
    if (sizes.size() != kBlocks)
        throw ConfigError("the model has exactly six blocks");
    std::size_t total = 0;
    for (std::size_t s : sizes)
        total += s;
    if (total != spec.nTotal)
        throw ConfigError("block sizes sum to " + std::to_string(total) + ", expected " + std::to_string(spec.nTotal));
    return sizes;
}

/// Edge probability from block row to block column.
inline BlockMatrix blockProbabilityMatrix(const SbmSpec &spec) {
    const double c = spec.effectiveCoupling();
    for (double p : {spec.pIn, spec.pOut, spec.pCore, c})
        if (!(p >= 0.0 && p <= 1.0))
            throw ConfigError("block probabilities must lie in [0, 1]");
    BlockMatrix m{};
    for (std::size_t g = 0; g < 2; ++g) {
        const std::size_t src = 3 * g, core = 3 * g + 1, sink = 3 * g + 2;
        const std::size_t otherCore = 3 * (1 - g) + 1, otherSink = 3 * (1 - g) + 2;
        m[src][src] = spec.pIn;
        m[sink][sink] = spec.pIn;
        m[core][core] = spec.pCore;
        m[core][otherCore] = spec.pIn;
        m[src][core] = spec.pOut;
        m[core][sink] = spec.pOut;
        m[src][otherCore] = c;
        m[core][otherSink] = c;
    }
    return m;
}

/**
 * Directed Bernoulli graph with unit weights: every ordered pair (u, v),
 * u != v, is an edge with the probability of its block pair. Node labels are
 * "0".."n-1" in block order. Returns the graph and the six-block ground truth.
 */
inline std::pair<WeightedDigraph, Partition> generateSbm(const SbmSpec &spec) {
    const auto sizes = resolvedBlockSizes(spec);
    const BlockMatrix prob = blockProbabilityMatrix(spec);
    const std::size_t n = spec.nTotal;

    std::vector<int> block(n);
    std::size_t at = 0;
    for (std::size_t b = 0; b < kBlocks; ++b)
        for (std::size_t i = 0; i < sizes[b]; ++i)
            block[at++] = static_cast<int>(b);

    std::mt19937_64 rng(spec.seed);
    std::vector<Edge> edges;
    for (node_t u = 0; u < n; ++u)
        for (node_t v = 0; v < n; ++v) {
            if (u == v)
                continue;
            const double p = prob[block[u]][block[v]];
            if (p > 0.0 && uniformUnit(rng) < p)
                edges.push_back({u, v, 1.0});
        }

    Partition truth;
    truth.nodes.resize(n);
    truth.labels = block;
    for (std::size_t i = 0; i < n; ++i)
        truth.nodes[i] = i;
    truth.side = Side::Combined;
    return {WeightedDigraph::fromEdges(n, std::move(edges)), std::move(truth)};
}

} // namespace flowstab

#endif // FLOWSTAB_SBM_HPP_
