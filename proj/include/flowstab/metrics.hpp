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

#ifndef FLOWSTAB_METRICS_HPP_
#define FLOWSTAB_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "common.hpp"
#include "graph.hpp"
#include "partition.hpp"

namespace flowstab {

/// Co-assignment counts of two labelings of the same n nodes. Only nonzero
/// cells are stored, sorted by (row, column).
struct ContingencyTable {
    struct Cell {
        int row = 0;
        int col = 0;
        std::size_t count = 0;
    };
    std::vector<Cell> cells;
    std::vector<std::size_t> rowSums;
    std::vector<std::size_t> colSums;
    std::size_t n = 0;

    ContingencyTable(std::span<const int> a, std::span<const int> b) {
        if (a.size() != b.size())
            throw ConfigError("labelings have different lengths");
        n = a.size();
        const int ka = a.empty() ? 0 : *std::max_element(a.begin(), a.end()) + 1;
        const int kb = b.empty() ? 0 : *std::max_element(b.begin(), b.end()) + 1;
        rowSums.assign(static_cast<std::size_t>(ka), 0);
        colSums.assign(static_cast<std::size_t>(kb), 0);
        std::vector<std::pair<int, int>> pairs(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (a[i] < 0 || b[i] < 0)
                throw ConfigError("negative cluster label");
            pairs[i] = {a[i], b[i]};
            ++rowSums[static_cast<std::size_t>(a[i])];
            ++colSums[static_cast<std::size_t>(b[i])];
        }
        std::sort(pairs.begin(), pairs.end());
        for (const auto &[r, c] : pairs) {
            if (cells.empty() || cells.back().row != r || cells.back().col != c)
                cells.push_back({r, c, 0});
            ++cells.back().count;
        }
    }

    double entropyRows() const { return entropy(rowSums); }
    double entropyCols() const { return entropy(colSums); }

    double mutualInformation() const {
        const double nn = static_cast<double>(n);
        double mi = 0.0;
        for (const Cell &cell : cells) {
            const double x = static_cast<double>(cell.count);
            const double rs = static_cast<double>(rowSums[static_cast<std::size_t>(cell.row)]);
            const double cs = static_cast<double>(colSums[static_cast<std::size_t>(cell.col)]);
            mi += x / nn * std::log(x * nn / (rs * cs));
        }
        return std::max(0.0, mi);
    }

private:
    double entropy(const std::vector<std::size_t> &sizes) const {
        double h = 0.0;
        for (std::size_t s : sizes)
            if (s > 0) {
                const double p = static_cast<double>(s) / static_cast<double>(n);
                h -= p * std::log(p);
            }
        return h;
    }
};

enum class NmiNormalization { Arithmetic, Max, Min };

/// Normalized mutual information, natural log. Two single-cluster labelings
/// score 1.
inline double nmi(std::span<const int> a, std::span<const int> b,
                  NmiNormalization norm = NmiNormalization::Arithmetic) {
    ContingencyTable ct(a, b);
    if (ct.n == 0)
        throw ConfigError("empty comparison universe");
    const double ha = ct.entropyRows(), hb = ct.entropyCols();
    double denom = 0.0;
    switch (norm) {
    case NmiNormalization::Arithmetic:
        denom = 0.5 * (ha + hb);
        break;
    case NmiNormalization::Max:
        denom = std::max(ha, hb);
        break;
    case NmiNormalization::Min:
        denom = std::min(ha, hb);
        break;
    }
    if (ha <= 0.0 && hb <= 0.0)
        return 1.0;
    if (denom <= 0.0)
        return 0.0;
    return std::clamp(ct.mutualInformation() / denom, 0.0, 1.0);
}

/// Variation of information divided by ln n.
inline double nvi(std::span<const int> a, std::span<const int> b) {
    ContingencyTable ct(a, b);
    if (ct.n < 2)
        throw ConfigError("NVI needs at least two nodes");
    const double vi = ct.entropyRows() + ct.entropyCols() - 2.0 * ct.mutualInformation();
    return std::clamp(vi / std::log(static_cast<double>(ct.n)), 0.0, 1.0);
}

namespace detail {
inline void requireSameUniverse(const Partition &p, const Partition &q) {
    if (p.nodes != q.nodes)
        throw ConfigError("partitions are defined over different node sets");
}
} // namespace detail

inline double nmi(const Partition &p, const Partition &q, NmiNormalization norm = NmiNormalization::Arithmetic) {
    detail::requireSameUniverse(p, q);
    return nmi(std::span<const int>(p.labels), std::span<const int>(q.labels), norm);
}

inline double nvi(const Partition &p, const Partition &q) {
    detail::requireSameUniverse(p, q);
    return nvi(std::span<const int>(p.labels), std::span<const int>(q.labels));
}

/**
 * Extrapolated rank-biased overlap of two rankings with persistence p. For
 * lists of lengths s <= l, with X_d the overlap of the prefixes at depth d
 * (the shorter list taken whole once d > s):
 *
 *   RBO = (1-p)/p [ sum_{d=1..l} X_d/d p^d + sum_{d=s+1..l} X_s (d-s)/(s d) p^d ]
 *         + [ (X_l - X_s)/l + X_s/s ] p^l
 */
template <typename T>
double rbo(const std::vector<T> &a, const std::vector<T> &b, double p = 0.9) {
    if (!(p > 0.0 && p < 1.0))
        throw ConfigError("RBO persistence must lie in (0, 1)");
    auto checkUnique = [](const std::vector<T> &v) {
        std::unordered_set<T> seen;
        for (const T &x : v)
            if (!seen.insert(x).second)
                throw ConfigError("duplicate element in ranked list");
    };
    checkUnique(a);
    checkUnique(b);
    const std::vector<T> &shortList = a.size() <= b.size() ? a : b;
    const std::vector<T> &longList = a.size() <= b.size() ? b : a;
    const std::size_t s = shortList.size(), l = longList.size();
    if (l == 0)
        return 1.0;
    if (s == 0)
        return 0.0;

    std::unordered_set<T> seenShort, seenLong;
    std::vector<double> overlap(l + 1, 0.0);
    double x = 0.0;
    for (std::size_t d = 1; d <= l; ++d) {
        const T &fromLong = longList[d - 1];
        if (d <= s) {
            const T &fromShort = shortList[d - 1];
            if (fromShort == fromLong) {
                x += 1.0;
            } else {
                if (seenLong.count(fromShort))
                    x += 1.0;
                if (seenShort.count(fromLong))
                    x += 1.0;
            }
            seenShort.insert(fromShort);
        } else if (seenShort.count(fromLong)) {
            x += 1.0;
        }
        seenLong.insert(fromLong);
        overlap[d] = x;
    }

    const double xs = overlap[s], xl = overlap[l];
    double sum = 0.0, pd = 1.0;
    for (std::size_t d = 1; d <= l; ++d) {
        pd *= p;
        sum += overlap[d] / static_cast<double>(d) * pd;
        if (d > s)
            sum += xs * static_cast<double>(d - s) / (static_cast<double>(s) * static_cast<double>(d)) * pd;
    }
    const double tail = ((xl - xs) / static_cast<double>(l) + xs / static_cast<double>(s)) * pd;
    return std::clamp((1.0 - p) / p * sum + tail, 0.0, 1.0);
}

/// Perron root of the weighted adjacency, by 100 power-iteration steps on
/// A + I (same Perron vector, aperiodic).
inline double spectralRadius(const WeightedDigraph &g, std::size_t steps = 100) {
    const std::size_t n = g.numberOfNodes();
    if (n == 0 || g.numberOfEdges() == 0)
        return 0.0;
    std::vector<double> x(n, 1.0 / static_cast<double>(n)), y(n);
    double ratio = 1.0;
    for (std::size_t it = 0; it < steps; ++it) {
        y = x;
        for (const Edge &e : g.edges())
            y[e.dst] += e.weight * x[e.src];
        const double sx = std::accumulate(x.begin(), x.end(), 0.0);
        const double sy = std::accumulate(y.begin(), y.end(), 0.0);
        ratio = sy / sx;
        for (std::size_t i = 0; i < n; ++i)
            x[i] = y[i] / sy;
    }
    return std::max(0.0, ratio - 1.0);
}

/// Katz centrality x = sum_{k>=1} damping^k (A^T)^k 1, iterated to 1e-10.
inline std::vector<double> katzCentrality(const WeightedDigraph &g, double damping) {
    const double rho = spectralRadius(g);
    if (!(damping > 0.0))
        throw ConfigError("Katz damping must be positive");
    if (rho > 0.0 && damping * rho >= 1.0)
        throw NumericalError("Katz damping " + formatDouble(damping) + " >= 1/spectral radius " +
                             formatDouble(1.0 / rho));
    const std::size_t n = g.numberOfNodes();
    std::vector<double> x(n, 0.0), next(n);
    for (std::size_t it = 0; it < 100000; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (const Edge &e : g.edges())
            next[e.dst] += damping * e.weight * (1.0 + x[e.src]);
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            change = std::max(change, std::abs(next[i] - x[i]));
        x.swap(next);
        if (change < 1e-10)
            return x;
    }
    throw NumericalError("Katz iteration did not converge");
}

/// Default damping: 0.85 / spectral radius (0.85 for nilpotent graphs).
inline double defaultKatzDamping(const WeightedDigraph &g) {
    const double rho = spectralRadius(g);
    return rho > 0.0 ? 0.85 / rho : 0.85;
}

/// `nodes` ordered by descending Katz centrality, ties by label.
inline std::vector<node_t> katzRanking(const WeightedDigraph &g, double damping, std::vector<node_t> nodes) {
    const std::vector<double> x = katzCentrality(g, damping);
    std::sort(nodes.begin(), nodes.end(), [&](node_t a, node_t b) {
        if (x[a] != x[b])
            return x[a] > x[b];
        return g.label(a) < g.label(b);
    });
    return nodes;
}

enum class Role { Upstream, Core, Downstream };

inline const char *toString(Role r) {
    switch (r) {
    case Role::Upstream:
        return "upstream";
    case Role::Downstream:
        return "downstream";
    default:
        return "core";
    }
}

enum class InBalanceRule {
    /// w_in / (w_in + w_out) over boundary edges.
    Boundary,
    /// intra / (intra + w_in + w_out).
    IntraVsBoundary,
};

struct ClusterRole {
    int cluster = 0;
    double inBalance = 0.5;
    Role role = Role::Core;
    std::size_t size = 0;
};

inline std::vector<ClusterRole> clusterRoles(const WeightedDigraph &g, const Partition &p,
                                             InBalanceRule rule = InBalanceRule::Boundary) {
    std::vector<int> labelOf(g.numberOfNodes(), -1);
    for (std::size_t i = 0; i < p.nodes.size(); ++i) {
        if (p.nodes[i] >= g.numberOfNodes())
            throw ConfigError("partition node outside the graph");
        labelOf[p.nodes[i]] = p.labels[i];
    }
    for (int l : labelOf)
        if (l < 0)
            throw ConfigError("partition does not cover every graph node");

    const std::size_t k = p.numberOfClusters();
    std::vector<double> win(k, 0.0), wout(k, 0.0), intra(k, 0.0);
    for (const Edge &e : g.edges()) {
        const auto cs = static_cast<std::size_t>(labelOf[e.src]);
        const auto cd = static_cast<std::size_t>(labelOf[e.dst]);
        if (cs == cd) {
            intra[cs] += e.weight;
        } else {
            wout[cs] += e.weight;
            win[cd] += e.weight;
        }
    }
    const auto sizes = p.clusterSizes();
    std::vector<ClusterRole> roles(k);
    for (std::size_t c = 0; c < k; ++c) {
        ClusterRole &r = roles[c];
        r.cluster = static_cast<int>(c);
        r.size = sizes[c];
        const double num = rule == InBalanceRule::Boundary ? win[c] : intra[c];
        const double den = rule == InBalanceRule::Boundary ? win[c] + wout[c] : intra[c] + win[c] + wout[c];
        r.inBalance = den > 0.0 ? num / den : 0.5;
        r.role = r.inBalance <= 0.2 ? Role::Upstream : (r.inBalance >= 0.8 ? Role::Downstream : Role::Core);
    }
    return roles;
}

} // namespace flowstab

#endif // FLOWSTAB_METRICS_HPP_
