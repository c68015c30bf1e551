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

#ifndef FLOWSTAB_ERROR_MODEL_HPP_
#define FLOWSTAB_ERROR_MODEL_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "common.hpp"
#include "graph.hpp"

namespace flowstab {

struct RemovalRecord {
    std::vector<Edge> removedEdges;
    double fraction = 0.0;
    std::uint64_t seed = 0;
};

struct DegradedGraph {
    WeightedDigraph graph;
    ErrorVector errors;
    RemovalRecord record;
};

/**
 * Remove round(r |E|) whole edges chosen uniformly without replacement. The
 * degraded graph keeps every node; eps_i is the removed out-weight of i, so
 * s_out(degraded) + eps = s_out(original) node by node.
 */
inline DegradedGraph removeRandomEdges(const WeightedDigraph &g, double r, std::uint64_t seed) {
    if (!(r >= 0.0 && r < 1.0))
        throw ConfigError("removal fraction must lie in [0, 1)");
    const std::size_t m = g.numberOfEdges();
    const auto k = static_cast<std::size_t>(std::llround(r * static_cast<double>(m)));

    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i)
        idx[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < k; ++i)
        std::swap(idx[i], idx[i + uniformBelow(rng, m - i)]);
    std::vector<bool> removed(m, false);
    for (std::size_t i = 0; i < k; ++i)
        removed[idx[i]] = true;

    DegradedGraph out;
    out.record.fraction = r;
    out.record.seed = seed;
    out.errors = ErrorVector::zeros(g.numberOfNodes());
    std::vector<Edge> kept;
    kept.reserve(m - k);
    for (std::size_t i = 0; i < m; ++i) {
        const Edge &e = g.edges()[i];
        if (removed[i]) {
            out.record.removedEdges.push_back(e);
            out.errors.epsOut[e.src] += e.weight;
        } else {
            kept.push_back(e);
        }
    }
    out.graph = WeightedDigraph(g.labels(), std::move(kept));
    return out;
}

/// Per-channel post counts used to estimate missing out-links.
struct ChannelStats {
    std::string node;
    double nDeleted = 0;
    double nObserved = 0;
    double nWithLinks = 0;
};

/**
 * eps_i = n_deleted_i * f_i with f_i = n_with_links_i / n_observed_i (0 when
 * nothing was observed). Graph nodes without a stats row get eps = 0.
 */
inline ErrorVector estimateErrors(const std::vector<ChannelStats> &stats, const WeightedDigraph &g) {
    ErrorVector e = ErrorVector::zeros(g.numberOfNodes());
    std::vector<bool> seen(g.numberOfNodes(), false);
    std::size_t unobserved = 0;
    for (const ChannelStats &s : stats) {
        if (!(s.nDeleted >= 0) || !(s.nObserved >= 0) || !(s.nWithLinks >= 0))
            throw ConfigError("negative count for node '" + s.node + "'");
        if (s.nWithLinks > s.nObserved)
            throw ConfigError("node '" + s.node + "' has more posts with links than observed posts");
        auto idx = g.indexOf(s.node);
        if (!idx)
            continue;
        seen[*idx] = true;
        if (s.nObserved == 0) {
            if (s.nDeleted > 0)
                ++unobserved;
            continue;
        }
        e.epsOut[*idx] = s.nDeleted * (s.nWithLinks / s.nObserved);
    }
    std::size_t missing = 0;
    for (bool b : seen)
        missing += b ? 0 : 1;
    if (missing > 0)
        warn(std::to_string(missing) + " graph nodes have no channel stats; their error is set to 0");
    if (unobserved > 0)
        warn(std::to_string(unobserved) + " nodes have deleted posts but no observed posts; their error is set to 0");
    return e;
}

} // namespace flowstab

#endif // FLOWSTAB_ERROR_MODEL_HPP_
