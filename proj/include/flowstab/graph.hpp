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

#ifndef FLOWSTAB_GRAPH_HPP_
#define FLOWSTAB_GRAPH_HPP_

#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "common.hpp"

namespace flowstab {

using node_t = std::size_t;

struct Edge {
    node_t src;
    node_t dst;
    double weight;

    friend bool operator==(const Edge &, const Edge &) = default;
};

/**
 * Sparse weighted directed graph over dense node indices 0..n-1, each carrying
 * an opaque string label. Duplicate (src, dst) pairs are summed on
 * construction and edges are stored sorted by (src, dst). Self-loops are
 * ordinary edges. Immutable once built.
 */
class WeightedDigraph {
public:
    WeightedDigraph() = default;

    WeightedDigraph(std::vector<std::string> labels, std::vector<Edge> edges) : labels_(std::move(labels)) {
        const std::size_t n = labels_.size();
        for (node_t i = 0; i < n; ++i) {
            if (!index_.emplace(labels_[i], i).second)
                throw ConfigError("duplicate node label '" + labels_[i] + "'");
        }
        for (const Edge &e : edges) {
            if (e.src >= n || e.dst >= n)
                throw ConfigError("edge endpoint out of range");
            if (!(e.weight > 0.0))
                throw ConfigError("edge weight must be positive");
        }
        std::sort(edges.begin(), edges.end(), [](const Edge &a, const Edge &b) {
            return a.src != b.src ? a.src < b.src : a.dst < b.dst;
        });
        for (const Edge &e : edges) {
            if (!edges_.empty() && edges_.back().src == e.src && edges_.back().dst == e.dst)
                edges_.back().weight += e.weight;
            else
                edges_.push_back(e);
        }

        outOffsets_.assign(n + 1, 0);
        sOut_.assign(n, 0.0);
        sIn_.assign(n, 0.0);
        for (const Edge &e : edges_) {
            ++outOffsets_[e.src + 1];
            sOut_[e.src] += e.weight;
            sIn_[e.dst] += e.weight;
        }
        for (std::size_t i = 0; i < n; ++i)
            outOffsets_[i + 1] += outOffsets_[i];

        inOffsets_.assign(n + 1, 0);
        for (const Edge &e : edges_)
            ++inOffsets_[e.dst + 1];
        for (std::size_t i = 0; i < n; ++i)
            inOffsets_[i + 1] += inOffsets_[i];
        inEdges_.resize(edges_.size());
        std::vector<std::size_t> fill(inOffsets_.begin(), inOffsets_.end() - 1);
        for (std::size_t k = 0; k < edges_.size(); ++k)
            inEdges_[fill[edges_[k].dst]++] = k;
    }

    /// Unlabelled convenience constructor; node i is labelled "i".
    static WeightedDigraph fromEdges(std::size_t n, std::vector<Edge> edges) {
        std::vector<std::string> labels(n);
        for (std::size_t i = 0; i < n; ++i)
            labels[i] = std::to_string(i);
        return WeightedDigraph(std::move(labels), std::move(edges));
    }

    std::size_t numberOfNodes() const noexcept { return labels_.size(); }
    std::size_t numberOfEdges() const noexcept { return edges_.size(); }

    const std::vector<Edge> &edges() const noexcept { return edges_; }
    const std::vector<std::string> &labels() const noexcept { return labels_; }
    const std::string &label(node_t u) const { return labels_.at(u); }

    std::optional<node_t> indexOf(const std::string &label) const {
        auto it = index_.find(label);
        if (it == index_.end())
            return std::nullopt;
        return it->second;
    }

    double outStrength(node_t u) const { return sOut_[u]; }
    double inStrength(node_t u) const { return sIn_[u]; }
    const std::vector<double> &outStrengths() const noexcept { return sOut_; }
    const std::vector<double> &inStrengths() const noexcept { return sIn_; }
    double totalWeight() const {
        double w = 0.0;
        for (const Edge &e : edges_)
            w += e.weight;
        return w;
    }

    /// Edges leaving u, sorted by destination.
    std::span<const Edge> outEdges(node_t u) const {
        return {edges_.data() + outOffsets_[u], edges_.data() + outOffsets_[u + 1]};
    }

    /// Visit (src, weight) of every edge entering v.
    template <typename F>
    void forInEdges(node_t v, F &&f) const {
        for (std::size_t k = inOffsets_[v]; k < inOffsets_[v + 1]; ++k)
            f(edges_[inEdges_[k]].src, edges_[inEdges_[k]].weight);
    }

    std::size_t outDegree(node_t u) const { return outOffsets_[u + 1] - outOffsets_[u]; }
    std::size_t inDegree(node_t v) const { return inOffsets_[v + 1] - inOffsets_[v]; }

    /// Recompute strengths from the edge list and compare with the caches.
    bool strengthsConsistent(double relTol = 1e-12) const {
        std::vector<double> so(numberOfNodes(), 0.0), si(numberOfNodes(), 0.0);
        for (const Edge &e : edges_) {
            so[e.src] += e.weight;
            si[e.dst] += e.weight;
        }
        auto close = [relTol](double a, double b) {
            return std::abs(a - b) <= relTol * std::max({1.0, std::abs(a), std::abs(b)});
        };
        for (std::size_t i = 0; i < numberOfNodes(); ++i) {
            if (!close(so[i], sOut_[i]) || !close(si[i], sIn_[i]))
                return false;
        }
        return true;
    }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, node_t> index_;
    std::vector<Edge> edges_;
    std::vector<std::size_t> outOffsets_;
    std::vector<std::size_t> inOffsets_;
    std::vector<std::size_t> inEdges_;
    std::vector<double> sOut_;
    std::vector<double> sIn_;
};

/// Per-node uncertainty on the measured out-strength, and optionally on the
/// in-strength (symmetric variant only).
struct ErrorVector {
    std::vector<double> epsOut;
    std::optional<std::vector<double>> epsIn;

    static ErrorVector zeros(std::size_t n) { return ErrorVector{std::vector<double>(n, 0.0), std::nullopt}; }

    void validate(std::size_t n) const {
        if (epsOut.size() != n)
            throw ConfigError("error vector length " + std::to_string(epsOut.size()) + " does not match graph size " +
                              std::to_string(n));
        for (double e : epsOut)
            if (!(e >= 0.0))
                throw ConfigError("negative or NaN error entry");
        if (epsIn) {
            if (epsIn->size() != n)
                throw ConfigError("in-strength error vector length mismatch");
            for (double e : *epsIn)
                if (!(e >= 0.0))
                    throw ConfigError("negative or NaN in-strength error entry");
        }
    }
};

/**
 * Subgraph induced by the nodes that survive one of the process reductions.
 * `graph` is re-indexed densely over the survivors and keeps their original
 * labels, so its strengths are the strengths within the reduced graph.
 */
struct ReducedGraph {
    std::vector<node_t> kept;             // reduced index -> original index
    std::vector<std::ptrdiff_t> toReduced; // original index -> reduced index or -1
    WeightedDigraph graph;

    std::size_t size() const noexcept { return kept.size(); }
    bool contains(node_t original) const { return toReduced[original] >= 0; }

    /// Restrict a per-node vector of the original graph to the survivors.
    std::vector<double> restrict(const std::vector<double> &values) const {
        std::vector<double> out(kept.size());
        for (std::size_t r = 0; r < kept.size(); ++r)
            out[r] = values[kept[r]];
        return out;
    }

    /// Two-column CSV `original_label,reduced_index`.
    std::string mappingCsv() const {
        std::string out = "original_label,reduced_index\n";
        for (std::size_t r = 0; r < kept.size(); ++r)
            out += graph.label(r) + "," + std::to_string(r) + "\n";
        return out;
    }
};

namespace detail {

inline ReducedGraph induce(const WeightedDigraph &g, const std::vector<bool> &alive) {
    ReducedGraph rg;
    rg.toReduced.assign(g.numberOfNodes(), -1);
    std::vector<std::string> labels;
    for (node_t u = 0; u < g.numberOfNodes(); ++u) {
        if (alive[u]) {
            rg.toReduced[u] = static_cast<std::ptrdiff_t>(rg.kept.size());
            rg.kept.push_back(u);
            labels.push_back(g.label(u));
        }
    }
    std::vector<Edge> edges;
    for (const Edge &e : g.edges()) {
        if (alive[e.src] && alive[e.dst])
            edges.push_back({static_cast<node_t>(rg.toReduced[e.src]), static_cast<node_t>(rg.toReduced[e.dst]),
                             e.weight});
    }
    rg.graph = WeightedDigraph(std::move(labels), std::move(edges));
    return rg;
}

// Iteratively peel nodes whose remaining out-degree (forward) or in-degree
// (backward) is zero and that are not protected. Degrees are tracked as edge
// counts, which is exact because every weight is positive.
inline std::vector<bool> peel(const WeightedDigraph &g, bool outgoing, const std::vector<bool> &protect) {
    const std::size_t n = g.numberOfNodes();
    std::vector<bool> alive(n, true);
    std::vector<std::size_t> degree(n);
    std::vector<node_t> queue;
    for (node_t u = 0; u < n; ++u) {
        degree[u] = outgoing ? g.outDegree(u) : g.inDegree(u);
        if (degree[u] == 0 && !protect[u]) {
            alive[u] = false;
            queue.push_back(u);
        }
    }
    while (!queue.empty()) {
        node_t u = queue.back();
        queue.pop_back();
        auto drop = [&](node_t w) {
            if (alive[w] && --degree[w] == 0 && !protect[w]) {
                alive[w] = false;
                queue.push_back(w);
            }
        };
        if (outgoing)
            g.forInEdges(u, [&](node_t src, double) { drop(src); });
        else
            for (const Edge &e : g.outEdges(u))
                drop(e.dst);
    }
    return alive;
}

} // namespace detail

/// Backward-process domain: iteratively drop nodes with zero in-strength.
inline ReducedGraph reduceBackward(const WeightedDigraph &g) {
    auto alive = detail::peel(g, false, std::vector<bool>(g.numberOfNodes(), false));
    ReducedGraph rg = detail::induce(g, alive);
    if (rg.size() == 0)
        throw NumericalError("backward process empty");
    return rg;
}

/// Forward-process domain of plain flow stability: iteratively drop nodes
/// with zero out-strength.
inline ReducedGraph reduceForwardFs(const WeightedDigraph &g) {
    auto alive = detail::peel(g, true, std::vector<bool>(g.numberOfNodes(), false));
    ReducedGraph rg = detail::induce(g, alive);
    if (rg.size() == 0)
        throw NumericalError("forward process empty");
    return rg;
}

/// Forward-process domain with uncertainty: a node is dropped only when both
/// its remaining out-strength and its error are zero.
inline ReducedGraph reduceForwardDelta(const WeightedDigraph &g, const ErrorVector &e) {
    e.validate(g.numberOfNodes());
    std::vector<bool> protect(g.numberOfNodes());
    for (node_t u = 0; u < g.numberOfNodes(); ++u)
        protect[u] = e.epsOut[u] > 0.0;
    auto alive = detail::peel(g, true, protect);
    ReducedGraph rg = detail::induce(g, alive);
    if (rg.size() == 0)
        throw NumericalError("forward process empty");
    return rg;
}

/**
 * Read a whitespace-separated edge list `src dst [weight]`. Lines starting
 * with '#' and blank lines are skipped; a missing weight means 1. Labels are
 * interned in order of first appearance. When `directed` is false each row
 * contributes both directions.
 */
inline WeightedDigraph parseEdgeList(std::istream &in, bool directed = true) {
    std::vector<std::string> labels;
    std::unordered_map<std::string, node_t> index;
    std::vector<Edge> edges;
    auto intern = [&](const std::string &label) {
        auto [it, inserted] = index.emplace(label, labels.size());
        if (inserted)
            labels.push_back(label);
        return it->second;
    };

    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#')
            continue;
        std::istringstream row(line);
        std::vector<std::string> tok;
        for (std::string t; row >> t;)
            tok.push_back(t);
        if (tok.size() == 1) {
            // a bare label declares a node without edges
            intern(tok[0]);
            continue;
        }
        if (tok.size() != 2 && tok.size() != 3)
            throw IoError("malformed edge row at line " + std::to_string(lineNo));
        double w = 1.0;
        if (tok.size() == 3) {
            const char *b = tok[2].data();
            const char *end = b + tok[2].size();
            auto res = std::from_chars(b, end, w);
            if (res.ec != std::errc() || res.ptr != end)
                throw IoError("malformed weight at line " + std::to_string(lineNo));
            if (!(w > 0.0))
                throw IoError("non-positive weight at line " + std::to_string(lineNo));
        }
        node_t s = intern(tok[0]);
        node_t d = intern(tok[1]);
        edges.push_back({s, d, w});
        if (!directed && s != d)
            edges.push_back({d, s, w});
    }
    if (labels.empty())
        throw IoError("empty graph");
    return WeightedDigraph(std::move(labels), std::move(edges));
}

inline WeightedDigraph loadEdgeList(const std::string &path, bool directed = true) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open edge list '" + path + "'");
    return parseEdgeList(in, directed);
}

/// Edge list with 17-significant-digit weights, one `src dst weight` per line.
/// When reading the edges back would not reproduce the node set and order
/// (isolated nodes, or first appearances out of order), every label is
/// written first as a bare line.
inline void writeEdgeList(std::ostream &out, const WeightedDigraph &g) {
    node_t next = 0;
    std::vector<bool> seen(g.numberOfNodes(), false);
    bool inOrder = true;
    for (const Edge &e : g.edges())
        for (node_t u : {e.src, e.dst}) {
            if (seen[u])
                continue;
            seen[u] = true;
            inOrder = inOrder && u == next++;
        }
    if (!inOrder || next != g.numberOfNodes())
        for (node_t u = 0; u < g.numberOfNodes(); ++u)
            out << g.label(u) << '\n';
    for (const Edge &e : g.edges())
        out << g.label(e.src) << ' ' << g.label(e.dst) << ' ' << formatDouble(e.weight) << '\n';
}

} // namespace flowstab

#endif // FLOWSTAB_GRAPH_HPP_
