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

#ifndef FLOWSTAB_EXPERIMENTS_HPP_
#define FLOWSTAB_EXPERIMENTS_HPP_

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "diffusion.hpp"
#include "error_model.hpp"
#include "graph.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "partition.hpp"
#include "sbm.hpp"
#include "sweep.hpp"

namespace flowstab {

/// Everything a command may need; each command reads the fields it uses.
struct ExperimentConfig {
    std::string edges;
    std::string errors;
    std::string stats;
    std::string groundTruth;
    std::vector<std::string> partitions;
    bool undirected = false;

    Method method = Method::Fs;
    double tMin = 1e-2;
    double tMax = 1e2;
    std::size_t tCount = 96;
    bool tLog = true;
    std::vector<double> rGrid{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4};
    std::size_t nRuns = 50;
    std::uint64_t seed = 0;
    CovarianceMode covMode = CovarianceMode::Exact;
    unsigned threads = 1;
    std::string outDir = ".";

    // compare / recovery
    std::size_t topK = 3;
    double rboP = 0.9;
    std::size_t excludeLargest = 0;
    std::optional<double> katzDamping;
    NmiNormalization nmiNorm = NmiNormalization::Arithmetic;
    InBalanceRule inBalance = InBalanceRule::Boundary;
    CombineRule combine = CombineRule::Attach;

    SbmSpec sbm;
    double removeFraction = 0.0;

    std::vector<double> times() const { return makeTimeGrid(tMin, tMax, tCount, tLog); }

    SweepOptions sweepOptions() const {
        SweepOptions o;
        o.times = times();
        o.nRuns = nRuns;
        o.method = method;
        o.covMode = covMode;
        o.seed = seed;
        o.threads = threads;
        o.combine = combine;
        return o;
    }

    void validate() const {
        if (nRuns == 0)
            throw ConfigError("n-runs must be at least 1");
        for (double r : rGrid)
            if (!(r >= 0.0 && r < 1.0))
                throw ConfigError("removal fractions must lie in [0, 1)");
        (void)times();
    }
};

// ---- cluster ---------------------------------------------------------------

inline std::string partitionFileName(std::size_t k) {
    std::string s = std::to_string(k);
    return "partition_" + std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s + ".json";
}

/// sweep.csv, scales.csv, sides.csv, partitions/, optimal_partition.json,
/// nvi_heatmap.csv and roles.csv under `dir`.
inline void writeSweep(const std::filesystem::path &dir, const SweepResult &r, const WeightedDigraph &g,
                       InBalanceRule rule = InBalanceRule::Boundary) {
    const std::size_t nt = r.times.size();
    {
        auto out = io::openForWrite(dir / "sweep.csv");
        out << "t,n_clusters,quality,nvi_next\n";
        for (std::size_t k = 0; k < nt; ++k) {
            out << formatDouble(r.times[k]) << ',';
            if (r.ok(k))
                out << r.nClusters[k] << ',' << formatDouble(r.partitions[k].quality);
            else
                out << ',';
            out << ',' << (k + 1 < nt ? io::formatOptional(r.nviAdjacent[k]) : std::string()) << '\n';
        }
    }
    {
        auto out = io::openForWrite(dir / "scales.csv");
        out << "index,t,nvi_next,selected\n";
        for (std::size_t k : r.localMinima)
            out << k << ',' << formatDouble(r.times[k]) << ',' << formatDouble(r.nviAdjacent[k]) << ','
                << (k == r.optimalIndex ? 1 : 0) << '\n';
    }
    {
        auto out = io::openForWrite(dir / "sides.csv");
        out << "t,nvi_next_forward,nvi_next_backward\n";
        for (std::size_t k = 0; k < nt; ++k) {
            out << formatDouble(r.times[k]);
            for (const auto *side : {&r.forward, &r.backward}) {
                out << ',';
                if (k + 1 < nt && r.ok(k) && r.ok(k + 1) && (*side)[k].size() >= 2)
                    out << formatDouble(nvi((*side)[k], (*side)[k + 1]));
            }
            out << '\n';
        }
    }
    std::vector<Partition> good;
    std::vector<double> goodTimes;
    for (std::size_t k = 0; k < nt; ++k) {
        if (!r.ok(k))
            continue;
        io::writePartition(dir / "partitions" / partitionFileName(k), r.partitions[k], g);
        good.push_back(r.partitions[k]);
        goodTimes.push_back(r.times[k]);
    }
    if (r.ok(r.optimalIndex)) {
        const Partition &best = r.partitions[r.optimalIndex];
        io::writePartition(dir / "optimal_partition.json", best, g);
        io::writeRoles(dir / "roles.csv", clusterRoles(g, best, rule));
    }
    if (good.size() >= 2 && g.numberOfNodes() >= 2)
        io::writeLabeledMatrix(dir / "nvi_heatmap.csv", goodTimes, nviHeatmap(good));
}

inline std::optional<ErrorVector> loadErrorsFor(const ExperimentConfig &cfg, const WeightedDigraph &g) {
    if (cfg.errors.empty()) {
        if (cfg.method == Method::Symmetric)
            throw ConfigError("the symmetric method needs an error file");
        return std::nullopt;
    }
    ErrorVector e = io::readErrors(cfg.errors, g);
    if (cfg.method == Method::Symmetric && !e.epsIn)
        throw ConfigError("the symmetric method needs an error file with an epsilon_in column");
    return e;
}

inline SweepResult cmdCluster(const ExperimentConfig &cfg) {
    cfg.validate();
    const WeightedDigraph g = loadEdgeList(cfg.edges, !cfg.undirected);
    const auto e = loadErrorsFor(cfg, g);
    SweepResult r = sweep(g, e, cfg.sweepOptions());
    writeSweep(cfg.outDir, r, g, cfg.inBalance);
    return r;
}

// ---- recovery ----------------------------------------------------------------

/// NMI against a reference partition, indexed [r][t], per method.
struct RecoveryGrid {
    std::vector<double> fractions;
    std::vector<double> times;
    Eigen::MatrixXd nmiFs;
    Eigen::MatrixXd nmiDelta;

    Eigen::MatrixXd difference() const { return nmiDelta - nmiFs; }

    static double rowMax(const Eigen::MatrixXd &m, Eigen::Index row) {
        double best = std::numeric_limits<double>::quiet_NaN();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            if (!std::isnan(m(row, c)) && (std::isnan(best) || m(row, c) > best))
                best = m(row, c);
        return best;
    }
    double maxFs(std::size_t i) const { return rowMax(nmiFs, static_cast<Eigen::Index>(i)); }
    double maxDelta(std::size_t i) const { return rowMax(nmiDelta, static_cast<Eigen::Index>(i)); }
};

struct RecoveryOptions {
    std::vector<double> fractions{0.05};
    SweepOptions sweep;
    /// Drop the nodes of this many largest reference clusters before scoring.
    std::size_t excludeLargest = 0;
    NmiNormalization nmiNorm = NmiNormalization::Arithmetic;
};

/// Nodes of the `k` largest clusters (ties by label) of p.
inline std::vector<bool> largestClusterMask(const Partition &p, std::size_t nNodes, std::size_t k) {
    std::vector<bool> mask(nNodes, false);
    if (k == 0)
        return mask;
    const auto sizes = p.clusterSizes();
    std::vector<int> order(sizes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return sizes[a] > sizes[b]; });
    std::vector<bool> excluded(sizes.size(), false);
    for (std::size_t i = 0; i < std::min(k, order.size()); ++i)
        excluded[order[i]] = true;
    for (std::size_t i = 0; i < p.nodes.size(); ++i)
        if (excluded[p.labels[i]])
            mask[p.nodes[i]] = true;
    return mask;
}

/**
 * For each removal fraction: degrade the graph (seeded per fraction), run a
 * plain and an error-aware sweep with the same cell seeds, and score every
 * combined partition against `reference` by NMI.
 */
inline RecoveryGrid runRecovery(const WeightedDigraph &g, const Partition &reference, const RecoveryOptions &opt) {
    if (reference.nodes.empty())
        throw ConfigError("empty reference partition");
    const std::vector<bool> excluded = largestClusterMask(reference, g.numberOfNodes(), opt.excludeLargest);
    auto keep = [&](node_t u) { return !excluded[u]; };
    const Partition ref = restrictPartition(reference, keep);
    if (ref.nodes.empty())
        throw ConfigError("empty comparison universe");

    RecoveryGrid grid;
    grid.fractions = opt.fractions;
    grid.times = opt.sweep.times;
    const auto nr = static_cast<Eigen::Index>(opt.fractions.size());
    const auto nt = static_cast<Eigen::Index>(grid.times.size());
    grid.nmiFs = Eigen::MatrixXd::Constant(nr, nt, std::numeric_limits<double>::quiet_NaN());
    grid.nmiDelta = grid.nmiFs;

    for (Eigen::Index i = 0; i < nr; ++i) {
        const double r = opt.fractions[static_cast<std::size_t>(i)];
        const DegradedGraph dg = removeRandomEdges(g, r, deriveSeed(opt.sweep.seed, 0x5eed, static_cast<std::uint64_t>(i)));
        SweepOptions so = opt.sweep;
        so.seed = deriveSeed(opt.sweep.seed, 0xc105e7, static_cast<std::uint64_t>(i));
        for (Method m : {Method::Fs, Method::Delta}) {
            so.method = m;
            SweepResult res = sweep(dg.graph, m == Method::Delta ? std::optional<ErrorVector>(dg.errors) : std::nullopt, so);
            Eigen::MatrixXd &target = m == Method::Fs ? grid.nmiFs : grid.nmiDelta;
            for (Eigen::Index k = 0; k < nt; ++k) {
                if (!res.ok(static_cast<std::size_t>(k)))
                    continue;
                const Partition p = restrictPartition(res.partitions[static_cast<std::size_t>(k)], keep);
                target(i, k) = nmi(p, ref, opt.nmiNorm);
            }
        }
    }
    return grid;
}

/// nmi_fs.csv, nmi_delta.csv, nmi_diff.csv (rows r, columns t) and
/// max_nmi.csv `r,max_nmi_fs,max_nmi_delta`.
inline void writeRecovery(const std::filesystem::path &dir, const RecoveryGrid &grid) {
    auto heat = [&](const std::string &name, const Eigen::MatrixXd &m) {
        auto out = io::openForWrite(dir / name);
        out << "r";
        for (double t : grid.times)
            out << ',' << formatDouble(t);
        out << '\n';
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            out << formatDouble(grid.fractions[static_cast<std::size_t>(i)]);
            for (Eigen::Index k = 0; k < m.cols(); ++k)
                out << ',' << io::formatOptional(m(i, k));
            out << '\n';
        }
    };
    heat("nmi_fs.csv", grid.nmiFs);
    heat("nmi_delta.csv", grid.nmiDelta);
    heat("nmi_diff.csv", grid.difference());
    auto out = io::openForWrite(dir / "max_nmi.csv");
    out << "r,max_nmi_fs,max_nmi_delta\n";
    for (std::size_t i = 0; i < grid.fractions.size(); ++i)
        out << formatDouble(grid.fractions[i]) << ',' << io::formatOptional(grid.maxFs(i)) << ','
            << io::formatOptional(grid.maxDelta(i)) << '\n';
}

inline RecoveryGrid cmdRecovery(const ExperimentConfig &cfg) {
    cfg.validate();
    if (cfg.groundTruth.empty())
        throw ConfigError("recovery needs a reference partition (--ground-truth)");
    const WeightedDigraph g = loadEdgeList(cfg.edges, !cfg.undirected);
    const Partition truth = io::readPartition(cfg.groundTruth, g);
    RecoveryOptions opt;
    opt.fractions = cfg.rGrid;
    opt.sweep = cfg.sweepOptions();
    opt.excludeLargest = cfg.excludeLargest;
    opt.nmiNorm = cfg.nmiNorm;
    RecoveryGrid grid = runRecovery(g, truth, opt);
    writeRecovery(cfg.outDir, grid);
    return grid;
}

// ---- errors ------------------------------------------------------------------

inline ErrorVector cmdEstimateErrors(const ExperimentConfig &cfg) {
    const WeightedDigraph g = loadEdgeList(cfg.edges, !cfg.undirected);
    ErrorVector e = estimateErrors(io::readChannelStats(cfg.stats), g);
    io::writeErrors(std::filesystem::path(cfg.outDir) / "errors.csv", e, g);
    return e;
}

inline DegradedGraph cmdRemoveEdges(const ExperimentConfig &cfg) {
    const WeightedDigraph g = loadEdgeList(cfg.edges, !cfg.undirected);
    DegradedGraph dg = removeRandomEdges(g, cfg.removeFraction, cfg.seed);
    const std::filesystem::path dir = cfg.outDir;
    io::writeEdgeListFile(dir / "edges.txt", dg.graph);
    io::writeErrors(dir / "errors.csv", dg.errors, dg.graph);
    io::writeRemovalRecord(dir / "removed.csv", dg.record, g);
    return dg;
}

// ---- sbm ---------------------------------------------------------------------

inline std::pair<WeightedDigraph, Partition> cmdSbmGen(const ExperimentConfig &cfg) {
    SbmSpec spec = cfg.sbm;
    spec.seed = cfg.seed;
    auto [g, truth] = generateSbm(spec);
    const std::filesystem::path dir = cfg.outDir;
    io::writeEdgeListFile(dir / "edges.txt", g);
    io::writePartition(dir / "ground_truth.json", truth, g);
    return {std::move(g), std::move(truth)};
}

// ---- compare -----------------------------------------------------------------

struct CompareResult {
    double nmi = 0.0;
    double nvi = 0.0;
    std::vector<double> rbo;

    std::string json() const {
        nlohmann::json j{{"nmi", nmi}, {"nvi", nvi}};
        if (!rbo.empty())
            j["rbo"] = rbo;
        return j.dump();
    }
};

struct CompareOptions {
    std::size_t topK = 3;
    double rboP = 0.9;
    /// Drop the nodes of this many largest clusters of the first partition.
    std::size_t excludeLargest = 0;
    std::optional<double> katzDamping;
    NmiNormalization nmiNorm = NmiNormalization::Arithmetic;
};

/// Members of the clusters of p ordered by size (descending, ties by label id).
inline std::vector<std::vector<node_t>> clustersBySize(const Partition &p) {
    std::vector<std::vector<node_t>> members(p.numberOfClusters());
    for (std::size_t i = 0; i < p.nodes.size(); ++i)
        members[p.labels[i]].push_back(p.nodes[i]);
    std::stable_sort(members.begin(), members.end(),
                     [](const auto &a, const auto &b) { return a.size() > b.size(); });
    return members;
}

/**
 * NMI and NVI of two partitions over the same nodes; with a graph, also the
 * RBO between the Katz-ranked members of the i-th largest clusters of each,
 * for i < topK.
 */
inline CompareResult comparePartitions(const Partition &a, const Partition &b, const WeightedDigraph *g,
                                       std::size_t nNodes, const CompareOptions &opt) {
    const std::vector<bool> excluded = largestClusterMask(a, nNodes, opt.excludeLargest);
    auto keep = [&](node_t u) { return !excluded[u]; };
    const Partition ra = restrictPartition(a, keep);
    const Partition rb = restrictPartition(b, keep);
    if (ra.nodes.empty() || rb.nodes.empty())
        throw ConfigError("empty comparison universe");

    CompareResult res;
    res.nmi = nmi(ra, rb, opt.nmiNorm);
    res.nvi = ra.size() >= 2 ? nvi(ra, rb) : 0.0;
    if (g) {
        const double damping = opt.katzDamping ? *opt.katzDamping : defaultKatzDamping(*g);
        const auto ca = clustersBySize(ra), cb = clustersBySize(rb);
        for (std::size_t i = 0; i < opt.topK && i < ca.size() && i < cb.size(); ++i) {
            std::vector<std::string> la, lb;
            for (node_t u : katzRanking(*g, damping, ca[i]))
                la.push_back(g->label(u));
            for (node_t u : katzRanking(*g, damping, cb[i]))
                lb.push_back(g->label(u));
            res.rbo.push_back(rbo(la, lb, opt.rboP));
        }
    }
    return res;
}

inline CompareResult cmdCompare(const ExperimentConfig &cfg) {
    if (cfg.partitions.size() != 2)
        throw ConfigError("compare needs exactly two partition files");
    CompareOptions opt;
    opt.topK = cfg.topK;
    opt.rboP = cfg.rboP;
    opt.excludeLargest = cfg.excludeLargest;
    opt.katzDamping = cfg.katzDamping;
    opt.nmiNorm = cfg.nmiNorm;
    if (!cfg.edges.empty()) {
        const WeightedDigraph g = loadEdgeList(cfg.edges, !cfg.undirected);
        const Partition a = io::readPartition(cfg.partitions[0], g);
        const Partition b = io::readPartition(cfg.partitions[1], g);
        return comparePartitions(a, b, &g, g.numberOfNodes(), opt);
    }
    const io::LabeledPartition la = io::readLabeledPartition(cfg.partitions[0]);
    const WeightedDigraph universe = io::labelUniverse(la);
    const Partition a = io::toPartition(la, universe);
    const Partition b = io::readPartition(cfg.partitions[1], universe);
    return comparePartitions(a, b, nullptr, universe.numberOfNodes(), opt);
}

// ---- roles / heatmap -----------------------------------------------------------

inline std::vector<ClusterRole> cmdRoles(const ExperimentConfig &cfg) {
    if (cfg.partitions.size() != 1)
        throw ConfigError("roles needs exactly one partition file");
    const WeightedDigraph g = loadEdgeList(cfg.edges, !cfg.undirected);
    const Partition p = io::readPartition(cfg.partitions[0], g);
    auto roles = clusterRoles(g, p, cfg.inBalance);
    io::writeRoles(std::filesystem::path(cfg.outDir) / "roles.csv", roles);
    return roles;
}

inline Eigen::MatrixXd cmdNviHeatmap(const ExperimentConfig &cfg) {
    if (cfg.partitions.size() < 2)
        throw ConfigError("nvi-heatmap needs at least two partition files");
    const io::LabeledPartition first = io::readLabeledPartition(cfg.partitions[0]);
    const WeightedDigraph universe = io::labelUniverse(first);
    std::vector<Partition> parts;
    std::vector<double> times;
    for (const auto &path : cfg.partitions) {
        parts.push_back(io::readPartition(path, universe));
        times.push_back(parts.back().markovTime);
    }
    Eigen::MatrixXd h = nviHeatmap(parts);
    io::writeLabeledMatrix(std::filesystem::path(cfg.outDir) / "nvi_heatmap.csv", times, h);
    return h;
}

} // namespace flowstab

#endif // FLOWSTAB_EXPERIMENTS_HPP_
