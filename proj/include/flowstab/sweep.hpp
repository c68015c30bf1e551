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

#ifndef FLOWSTAB_SWEEP_HPP_
#define FLOWSTAB_SWEEP_HPP_

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"
#include "diffusion.hpp"
#include "graph.hpp"
#include "louvain.hpp"
#include "metrics.hpp"
#include "partition.hpp"

namespace flowstab {

enum class Method { Fs, Delta, Symmetric };

inline const char *toString(Method m) {
    switch (m) {
    case Method::Fs:
        return "fs";
    case Method::Delta:
        return "delta";
    default:
        return "symmetric";
    }
}

/// Initial distribution of the covariance: Auto means uniform for exact and
/// stationary for linearized covariances.
enum class InitialDistribution { Auto, Uniform, Stationary };

/// `count` points from tmin to tmax inclusive, log- or linearly spaced.
inline std::vector<double> makeTimeGrid(double tmin, double tmax, std::size_t count, bool logSpaced = true) {
    if (count == 0)
        throw ConfigError("time grid must have at least one point");
    if (!(tmin > 0.0) || !(tmax >= tmin) || (count > 1 && !(tmax > tmin)))
        throw ConfigError("time grid needs 0 < t-min < t-max");
    std::vector<double> t(count);
    if (count == 1) {
        t[0] = tmin;
        return t;
    }
    for (std::size_t k = 0; k < count; ++k) {
        const double f = static_cast<double>(k) / static_cast<double>(count - 1);
        t[k] = logSpaced ? std::exp(std::log(tmin) + f * (std::log(tmax) - std::log(tmin))) : tmin + f * (tmax - tmin);
    }
    t.front() = tmin;
    t.back() = tmax;
    return t;
}

inline std::vector<double> defaultTimeGrid() { return makeTimeGrid(1e-2, 1e2, 96, true); }

struct SweepOptions {
    std::vector<double> times = defaultTimeGrid();
    std::size_t nRuns = 50;
    Method method = Method::Fs;
    CovarianceMode covMode = CovarianceMode::Exact;
    InitialDistribution initial = InitialDistribution::Auto;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    TransitionOptions transition;
    double stationaryTol = 1e-10;
    std::size_t stationaryMaxIter = 100000;
    LouvainOptions louvain;
    CombineRule combine = CombineRule::Attach;
};

/// Both diffusion processes of one method on one graph, built once per sweep.
struct ProcessPair {
    ReducedGraph forwardGraph;
    ReducedGraph backwardGraph;
    Generator forward;
    Generator backward;
    Eigen::RowVectorXd forwardP0;
    Eigen::RowVectorXd backwardP0;
    std::optional<StationaryDistribution> forwardStationary;
    std::optional<StationaryDistribution> backwardStationary;
};

inline ProcessPair prepareProcesses(const WeightedDigraph &g, const std::optional<ErrorVector> &e,
                                    const SweepOptions &opt) {
    ProcessPair pp;
    switch (opt.method) {
    case Method::Fs:
        pp.forwardGraph = reduceForwardFs(g);
        pp.forward = buildFsForward(pp.forwardGraph);
        pp.backwardGraph = reduceBackward(g);
        pp.backward = buildFsBackward(pp.backwardGraph);
        break;
    case Method::Delta: {
        const ErrorVector err = e ? *e : ErrorVector::zeros(g.numberOfNodes());
        pp.forwardGraph = reduceForwardDelta(g, err);
        pp.forward = buildDeltaForward(pp.forwardGraph, err).first;
        pp.backwardGraph = reduceBackward(g);
        pp.backward = buildFsBackward(pp.backwardGraph);
        break;
    }
    case Method::Symmetric: {
        if (!e || !e->epsIn)
            throw ConfigError("symmetric method needs both out- and in-strength errors");
        pp.forwardGraph = reduceForwardDelta(g, *e);
        pp.backwardGraph = reduceBackwardDelta(g, *e);
        auto [f, b] = buildSymmetric(pp.forwardGraph, pp.backwardGraph, *e);
        pp.forward = std::move(f);
        pp.backward = std::move(b);
        break;
    }
    }

    const bool stationaryStart = opt.initial == InitialDistribution::Stationary ||
                                 (opt.initial == InitialDistribution::Auto && opt.covMode == CovarianceMode::Linearized);
    if (stationaryStart || opt.covMode == CovarianceMode::Linearized) {
        pp.forwardStationary = stationary(pp.forward, opt.stationaryTol, opt.stationaryMaxIter, false);
        pp.backwardStationary = stationary(pp.backward, opt.stationaryTol, opt.stationaryMaxIter, false);
    }
    auto uniform = [](Eigen::Index n) { return Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n)); };
    pp.forwardP0 = stationaryStart ? pp.forwardStationary->pi : uniform(pp.forward.size());
    pp.backwardP0 = stationaryStart ? pp.backwardStationary->pi : uniform(pp.backward.size());
    return pp;
}

/// Covariance of one process at Markov time t under the sweep's mode.
inline CovarianceMatrix processCovariance(const Generator &gen, const Eigen::RowVectorXd &p0,
                                          const std::optional<StationaryDistribution> &st, double t,
                                          const SweepOptions &opt) {
    if (opt.covMode == CovarianceMode::Exact)
        return covarianceExact(gen, p0, t, UnreachablePolicy::Clamp, opt.transition);
    return covarianceLinearized(gen, *st, t);
}

struct SweepResult {
    std::vector<double> times;
    std::vector<Partition> partitions;
    std::vector<Partition> forward;
    std::vector<Partition> backward;
    /// Empty string for cells that succeeded, otherwise the error message.
    std::vector<std::string> failures;
    std::vector<std::size_t> nClusters;
    std::vector<double> nviAdjacent;
    std::vector<std::size_t> localMinima;
    std::size_t optimalIndex = 0;

    bool ok(std::size_t k) const { return failures[k].empty(); }
};

/**
 * Interior local minima of the adjacent-NVI curve (all reported) and the
 * selected scale.
 * Index k stands for the pair (t_k, t_{k+1}); interior means 0 < k < T-1.
 * The selected scale is the smallest interior global minimum, or 0 when the
 * grid has no interior point.
 */
inline void selectScales(SweepResult &r) {
    const std::size_t nt = r.times.size();
    r.localMinima.clear();
    r.optimalIndex = 0;
    if (nt < 3)
        return;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k + 1 < nt; ++k) {
        const double v = r.nviAdjacent[k];
        if (std::isnan(v))
            continue;
        const bool leftOk = std::isnan(r.nviAdjacent[k - 1]) || v <= r.nviAdjacent[k - 1];
        const bool rightOk = k + 1 >= r.nviAdjacent.size() || std::isnan(r.nviAdjacent[k + 1]) ||
                             v <= r.nviAdjacent[k + 1];
        if (leftOk && rightOk)
            r.localMinima.push_back(k);
        if (v < best) {
            best = v;
            r.optimalIndex = k;
        }
    }
}

/**
 * Markov-time sweep: at every grid time, cluster the forward and backward
 * covariances with best-of Louvain, combine, and compare consecutive
 * combined partitions by NVI. Cell seeds depend only on (seed, time index,
 * side), so the result is independent of `threads` and of the method.
 */
inline SweepResult sweep(const WeightedDigraph &g, const std::optional<ErrorVector> &e, const SweepOptions &opt) {
    const auto &times = opt.times;
    if (times.empty())
        throw ConfigError("empty time grid");
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!(times[k] > 0.0) || (k > 0 && !(times[k] > times[k - 1])))
            throw ConfigError("time grid must be positive and strictly increasing");
    }
    if (e)
        e->validate(g.numberOfNodes());
    const ProcessPair pp = prepareProcesses(g, e, opt);

    const std::size_t nt = times.size();
    SweepResult r;
    r.times = times;
    r.partitions.resize(nt);
    r.forward.resize(nt);
    r.backward.resize(nt);
    r.failures.assign(nt, std::string());
    r.nClusters.assign(nt, 0);

    parallelFor(nt, opt.threads, [&](std::size_t k) {
        const double t = times[k];
        try {
            CovarianceMatrix sf = processCovariance(pp.forward, pp.forwardP0, pp.forwardStationary, t, opt);
            Partition pf = bestOf(sf, opt.nRuns, deriveSeed(opt.seed, k, 0), 1, opt.louvain);
            CovarianceMatrix sb = processCovariance(pp.backward, pp.backwardP0, pp.backwardStationary, t, opt);
            Partition pb = bestOf(sb, opt.nRuns, deriveSeed(opt.seed, k, 1), 1, opt.louvain);
            r.forward[k] = liftPartition(pf, pp.forwardGraph, Side::Forward);
            r.backward[k] = liftPartition(pb, pp.backwardGraph, Side::Backward);
            r.partitions[k] = combine(r.forward[k], r.backward[k], g, opt.combine);
            r.partitions[k].markovTime = t;
            r.nClusters[k] = r.partitions[k].numberOfClusters();
        } catch (const Error &err) {
            r.failures[k] = err.what();
        }
    });
    for (std::size_t k = 0; k < nt; ++k)
        if (!r.ok(k))
            warn("Markov time " + formatDouble(times[k]) + " skipped: " + r.failures[k]);

    r.nviAdjacent.assign(nt > 0 ? nt - 1 : 0, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 0; k + 1 < nt; ++k)
        if (r.ok(k) && r.ok(k + 1))
            r.nviAdjacent[k] = g.numberOfNodes() >= 2 ? nvi(r.partitions[k], r.partitions[k + 1]) : 0.0;
    selectScales(r);
    return r;
}

/// Pairwise NVI between partitions over a common node set.
inline Eigen::MatrixXd nviHeatmap(const std::vector<Partition> &partitions) {
    const std::size_t m = partitions.size();
    if (m < 2)
        throw ConfigError("NVI heatmap needs at least two partitions");
    for (const Partition &p : partitions)
        if (p.nodes != partitions.front().nodes)
            throw ConfigError("partitions are defined over different node sets");
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) {
            const double v = nvi(partitions[a], partitions[b]);
            h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
            h(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
        }
    return h;
}

} // namespace flowstab

#endif // FLOWSTAB_SWEEP_HPP_
