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

#ifndef FLOWSTAB_LOUVAIN_HPP_
#define FLOWSTAB_LOUVAIN_HPP_

#include <cstdint>
#include <map>
#include <random>
#include <tuple>
#include <vector>

#include "common.hpp"
#include "diffusion.hpp"
#include "graph.hpp"
#include "partition.hpp"
#include "symmetric_matrix.hpp"

namespace flowstab {

struct LouvainOptions {
    /// A move is taken only if it raises the quality by more than this.
    double minGain = 1e-12;
    /// Inputs whose asymmetry exceeds this are rejected.
    double symmetryTol = 1e-8;
    std::size_t maxLevels = 64;
    std::size_t maxPasses = 1000;
};

namespace detail {

// One level of local moving. Returns true if any node changed cluster.
// For dense matrices every non-empty cluster is a candidate; for sparse
// matrices only clusters of structural neighbours are.
inline bool localMoving(const SymmetricMatrix &q, std::vector<int> &label, std::mt19937_64 &rng,
                        const LouvainOptions &opt) {
    const Eigen::Index n = q.size();
    const auto &low = q.lowRank();
    const std::size_t nl = low.size();
    // Per-cluster sums of u and v for every low-rank term.
    std::vector<std::vector<double>> sumU(nl, std::vector<double>(static_cast<std::size_t>(n), 0.0));
    std::vector<std::vector<double>> sumV(nl, std::vector<double>(static_cast<std::size_t>(n), 0.0));
    std::vector<int> clusterSize(static_cast<std::size_t>(n), 0);
    std::vector<int> freeLabels;
    for (Eigen::Index i = 0; i < n; ++i) {
        label[i] = static_cast<int>(i);
        clusterSize[i] = 1;
        for (std::size_t k = 0; k < nl; ++k) {
            sumU[k][i] = low[k].u[i];
            sumV[k][i] = low[k].v[i];
        }
    }

    std::vector<double> weight(static_cast<std::size_t>(n), 0.0);
    std::vector<char> touched(static_cast<std::size_t>(n), 0);
    std::vector<int> candidates;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        order[static_cast<std::size_t>(i)] = i;

    bool anyMove = false;
    for (std::size_t pass = 0; pass < opt.maxPasses; ++pass) {
        shuffle(order, rng);
        bool moved = false;
        for (Eigen::Index i : order) {
            const int own = label[i];
            // take i out of its cluster
            --clusterSize[own];
            for (std::size_t k = 0; k < nl; ++k) {
                sumU[k][own] -= low[k].u[i];
                sumV[k][own] -= low[k].v[i];
            }

            candidates.clear();
            auto touch = [&](int c, double w) {
                if (!touched[c]) {
                    touched[c] = 1;
                    weight[c] = 0.0;
                    candidates.push_back(c);
                }
                weight[c] += w;
            };
            touch(own, 0.0);
            if (q.isDense()) {
                const auto col = q.dense().col(i);
                for (Eigen::Index j = 0; j < n; ++j)
                    if (j != i)
                        touch(label[j], col[j]);
            } else {
                for (Eigen::SparseMatrix<double>::InnerIterator it(q.sparse(), i); it; ++it)
                    if (it.row() != i)
                        touch(label[it.row()], it.value());
            }

            auto linkTo = [&](int c) {
                double w = weight[c];
                for (std::size_t k = 0; k < nl; ++k)
                    w += low[k].scale * (low[k].u[i] * sumV[k][c] + low[k].v[i] * sumU[k][c]);
                return w;
            };
            const double stay = clusterSize[own] > 0 ? linkTo(own) : 0.0;
            int best = own;
            double bestLink = stay;
            for (int c : candidates) {
                if (c == own || clusterSize[c] == 0)
                    continue;
                const double w = linkTo(c);
                if (w > bestLink)
                    best = c, bestLink = w;
            }
            // isolating i scores 0
            if (clusterSize[own] > 0 && 0.0 > bestLink)
                best = -1, bestLink = 0.0;
            if (2.0 * (bestLink - stay) <= opt.minGain)
                best = own;
            if (best == -1) {
                best = freeLabels.back();
                freeLabels.pop_back();
            }

            for (int c : candidates)
                touched[c] = 0;

            label[i] = best;
            ++clusterSize[best];
            for (std::size_t k = 0; k < nl; ++k) {
                sumU[k][best] += low[k].u[i];
                sumV[k][best] += low[k].v[i];
            }
            if (best != own) {
                moved = true;
                if (clusterSize[own] == 0)
                    freeLabels.push_back(own);
            }
        }
        if (!moved)
            break;
        anyMove = true;
    }
    return anyMove;
}

// Sum entries over label blocks: S'(a,b) = sum_{i in a, j in b} S(i,j).
inline SymmetricMatrix aggregate(const SymmetricMatrix &q, const std::vector<int> &label, int k) {
    const Eigen::Index n = q.size();
    if (q.isDense()) {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k, k);
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i)
                out(label[i], label[j]) += q.dense()(i, j);
        return SymmetricMatrix::fromDense(std::move(out));
    }
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(q.sparse().nonZeros()));
    for (Eigen::Index j = 0; j < q.sparse().outerSize(); ++j)
        for (Eigen::SparseMatrix<double>::InnerIterator it(q.sparse(), j); it; ++it)
            t.emplace_back(label[it.row()], label[j], it.value());
    Eigen::SparseMatrix<double> s(k, k);
    s.setFromTriplets(t.begin(), t.end());
    std::vector<LowRankPair> low;
    for (const LowRankPair &p : q.lowRank()) {
        LowRankPair a{Eigen::VectorXd::Zero(k), Eigen::VectorXd::Zero(k), p.scale};
        for (Eigen::Index i = 0; i < n; ++i) {
            a.u[label[i]] += p.u[i];
            a.v[label[i]] += p.v[i];
        }
        low.push_back(std::move(a));
    }
    return SymmetricMatrix::fromSparse(std::move(s), std::move(low));
}

} // namespace detail

/**
 * Greedy multi-level optimisation of the clustered trace
 * Q = sum_c sum_{i,j in c} S_ij. Node order is shuffled per pass from `seed`;
 * levels are aggregated until a level produces no move.
 */
inline Partition louvainTrace(const SymmetricMatrix &S, std::uint64_t seed, const LouvainOptions &opt = {}) {
    const Eigen::Index n = S.size();
    if (S.asymmetry() > opt.symmetryTol)
        throw NumericalError("quality matrix is not symmetric");
    std::mt19937_64 rng(seed);

    std::vector<int> membership(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        membership[i] = static_cast<int>(i);

    SymmetricMatrix level = S;
    for (std::size_t lvl = 0; lvl < opt.maxLevels && level.size() > 1; ++lvl) {
        std::vector<int> label(static_cast<std::size_t>(level.size()));
        const bool moved = detail::localMoving(level, label, rng, opt);
        if (!moved)
            break;
        label = densify(label);
        int k = 0;
        for (int l : label)
            k = std::max(k, l + 1);
        for (int &m : membership)
            m = label[m];
        if (k == level.size())
            break;
        level = detail::aggregate(level, label, k);
    }

    Partition p = makePartition(membership, Side::Combined);
    p.quality = S.clusteredTrace(p.labels);
    return p;
}

inline Partition louvainTrace(const CovarianceMatrix &S, std::uint64_t seed, const LouvainOptions &opt = {}) {
    Partition p = louvainTrace(S.S, seed, opt);
    p.markovTime = S.markovTime;
    return p;
}

/**
 * Best of `nRuns` Louvain runs with seeds seed, seed+1, ...: highest quality,
 * then fewer clusters, then lowest seed. The result does not depend on
 * `threads`.
 */
inline Partition bestOf(const SymmetricMatrix &S, std::size_t nRuns, std::uint64_t seed, unsigned threads = 1,
                        const LouvainOptions &opt = {}) {
    if (nRuns == 0)
        throw ConfigError("best-of needs at least one run");
    std::vector<Partition> runs(nRuns);
    parallelFor(nRuns, threads, [&](std::size_t r) { runs[r] = louvainTrace(S, seed + r, opt); });
    std::size_t best = 0;
    for (std::size_t r = 1; r < nRuns; ++r) {
        const double qb = runs[best].quality, qr = runs[r].quality;
        const double tieTol = 1e-12 * std::max(1.0, std::abs(qb));
        if (qr > qb + tieTol ||
            (std::abs(qr - qb) <= tieTol && runs[r].numberOfClusters() < runs[best].numberOfClusters()))
            best = r;
    }
    return std::move(runs[best]);
}

inline Partition bestOf(const CovarianceMatrix &S, std::size_t nRuns, std::uint64_t seed, unsigned threads = 1,
                        const LouvainOptions &opt = {}) {
    Partition p = bestOf(S.S, nRuns, seed, threads, opt);
    p.markovTime = S.markovTime;
    return p;
}

/// Lift a partition over reduced indices 0..k-1 to the original node ids.
inline Partition liftPartition(const Partition &reduced, const ReducedGraph &rg, Side side) {
    Partition p = reduced;
    for (std::size_t i = 0; i < p.nodes.size(); ++i)
        p.nodes[i] = rg.kept[reduced.nodes[i]];
    p.side = side;
    return p;
}

/**
 * Combine forward and backward partitions over an n-node graph. Nodes in
 * both processes are clustered by the pair (forward, backward) label; nodes
 * in one process keep that side's cluster; nodes in neither are singletons.
 */
namespace detail {

inline std::vector<std::int64_t> sideLabels(const Partition &p, std::size_t nNodes) {
    std::vector<std::int64_t> l(nNodes, -1);
    for (std::size_t i = 0; i < p.nodes.size(); ++i)
        l.at(p.nodes[i]) = p.labels[i];
    return l;
}

inline Partition combineLabels(const std::vector<std::int64_t> &lf, const std::vector<std::int64_t> &lb,
                               const std::vector<std::int64_t> &attachF, const std::vector<std::int64_t> &attachB,
                               const Partition &fwd, const Partition &bwd) {
    const std::size_t n = lf.size();
    std::map<std::tuple<int, std::int64_t, std::int64_t>, int> keys;
    Partition out;
    out.side = Side::Combined;
    out.markovTime = fwd.markovTime;
    out.quality = fwd.quality + bwd.quality;
    out.nodes.resize(n);
    out.labels.resize(n);
    for (std::size_t u = 0; u < n; ++u) {
        std::tuple<int, std::int64_t, std::int64_t> key;
        if (lf[u] >= 0 && lb[u] >= 0)
            key = {0, lf[u], lb[u]};
        else if (lf[u] >= 0 && attachB[u] >= 0)
            key = {0, lf[u], attachB[u]};
        else if (lb[u] >= 0 && attachF[u] >= 0)
            key = {0, attachF[u], lb[u]};
        else if (lf[u] >= 0)
            key = {1, lf[u], 0};
        else if (lb[u] >= 0)
            key = {2, lb[u], 0};
        else
            key = {3, static_cast<std::int64_t>(u), 0};
        auto [it, inserted] = keys.emplace(key, static_cast<int>(keys.size()));
        out.nodes[u] = u;
        out.labels[u] = it->second;
    }
    return out;
}

} // namespace detail

/// How nodes present in only one process are placed.
enum class CombineRule {
    Separate, ///< one cluster per one-sided label
    Attach,   ///< borrow the missing label that sends the most one-step flow into the node
};

/// Intersection of forward and backward partitions; one-sided nodes keep
/// their own side's label in a separate range, isolated nodes are singletons.
inline Partition combine(const Partition &fwd, const Partition &bwd, std::size_t nNodes) {
    const std::vector<std::int64_t> none(nNodes, -1);
    return detail::combineLabels(detail::sideLabels(fwd, nNodes), detail::sideLabels(bwd, nNodes), none, none, fwd,
                                 bwd);
}

/**
 * With `Attach`, a forward-only node u takes the backward label b maximizing
 * the backward walk's one-step flow into u, sum over out-neighbours v of u
 * labelled b of w(u,v)/s_in(v); backward-only nodes symmetrically use the
 * forward flow w(v,u)/s_out(v) from in-neighbours. Nodes without any labelled
 * neighbour fall back to `Separate`.
 */
inline Partition combine(const Partition &fwd, const Partition &bwd, const WeightedDigraph &g,
                         CombineRule rule = CombineRule::Separate) {
    const std::size_t n = g.numberOfNodes();
    auto lf = detail::sideLabels(fwd, n);
    auto lb = detail::sideLabels(bwd, n);
    std::vector<std::int64_t> attachF(n, -1), attachB(n, -1);
    if (rule == CombineRule::Attach) {
        std::map<std::int64_t, double> score;
        auto pick = [&score] {
            std::int64_t best = -1;
            double bestScore = 0.0;
            for (const auto &[label, s] : score)
                if (s > bestScore) {
                    best = label;
                    bestScore = s;
                }
            score.clear();
            return best;
        };
        for (node_t u = 0; u < n; ++u) {
            if (lf[u] >= 0 && lb[u] < 0) {
                for (const auto &e : g.outEdges(u))
                    if (lb[e.dst] >= 0)
                        score[lb[e.dst]] += e.weight / g.inStrength(e.dst);
                attachB[u] = pick();
            } else if (lb[u] >= 0 && lf[u] < 0) {
                g.forInEdges(u, [&](node_t v, double w) {
                    if (lf[v] >= 0)
                        score[lf[v]] += w / g.outStrength(v);
                });
                attachF[u] = pick();
            }
        }
    }
    return detail::combineLabels(lf, lb, attachF, attachB, fwd, bwd);
}

} // namespace flowstab

#endif // FLOWSTAB_LOUVAIN_HPP_
