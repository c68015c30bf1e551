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

#ifndef FLOWSTAB_PARTITION_HPP_
#define FLOWSTAB_PARTITION_HPP_

#include <string>
#include <unordered_map>
#include <vector>

#include "graph.hpp"

namespace flowstab {

enum class Side { Forward, Backward, Combined };

inline const char *toString(Side s) {
    switch (s) {
    case Side::Forward:
        return "forward";
    case Side::Backward:
        return "backward";
    default:
        return "combined";
    }
}

/**
 * Assignment of a set of original-graph nodes to dense cluster labels
 * 0..k-1. `nodes` is the node universe in ascending order; `labels[i]` is the
 * cluster of `nodes[i]`.
 */
struct Partition {
    std::vector<node_t> nodes;
    std::vector<int> labels;
    double markovTime = 0.0;
    double quality = 0.0;
    Side side = Side::Combined;

    std::size_t size() const noexcept { return nodes.size(); }

    std::size_t numberOfClusters() const {
        int k = 0;
        for (int l : labels)
            k = std::max(k, l + 1);
        return static_cast<std::size_t>(k);
    }

    std::vector<std::size_t> clusterSizes() const {
        std::vector<std::size_t> sizes(numberOfClusters(), 0);
        for (int l : labels)
            ++sizes[static_cast<std::size_t>(l)];
        return sizes;
    }

    /// Labels are 0..k-1 without gaps and every node appears once.
    bool valid() const {
        if (nodes.size() != labels.size())
            return false;
        for (std::size_t i = 1; i < nodes.size(); ++i)
            if (nodes[i] <= nodes[i - 1])
                return false;
        std::vector<bool> seen(numberOfClusters(), false);
        for (int l : labels) {
            if (l < 0)
                return false;
            seen[static_cast<std::size_t>(l)] = true;
        }
        for (bool b : seen)
            if (!b)
                return false;
        return true;
    }
};

/// Relabel to 0..k-1 in order of first appearance.
inline std::vector<int> densify(const std::vector<int> &labels) {
    std::unordered_map<int, int> remap;
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, inserted] = remap.emplace(labels[i], static_cast<int>(remap.size()));
        out[i] = it->second;
    }
    return out;
}

/// Partition of nodes 0..n-1 from raw labels.
inline Partition makePartition(const std::vector<int> &labels, Side side = Side::Combined) {
    Partition p;
    p.nodes.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        p.nodes[i] = i;
    p.labels = densify(labels);
    p.side = side;
    return p;
}

/// Restrict a partition to the nodes for which keep(node) is true.
template <typename Pred>
Partition restrictPartition(const Partition &p, Pred keep) {
    Partition out;
    std::vector<int> raw;
    for (std::size_t i = 0; i < p.nodes.size(); ++i) {
        if (keep(p.nodes[i])) {
            out.nodes.push_back(p.nodes[i]);
            raw.push_back(p.labels[i]);
        }
    }
    out.labels = densify(raw);
    out.markovTime = p.markovTime;
    out.quality = p.quality;
    out.side = p.side;
    return out;
}

} // namespace flowstab

#endif // FLOWSTAB_PARTITION_HPP_
