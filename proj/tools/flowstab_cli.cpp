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

// Command-line front end. Exit codes: 0 success, 2 configuration error,
// 3 numerical failure, 4 I/O error.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include <flowstab/flowstab.hpp>

namespace {

using namespace flowstab;

const std::map<std::string, Method> kMethods{{"fs", Method::Fs}, {"delta", Method::Delta}, {"symmetric", Method::Symmetric}};
const std::map<std::string, CovarianceMode> kCovModes{{"exact", CovarianceMode::Exact},
                                                       {"linearized", CovarianceMode::Linearized}};
const std::map<std::string, NmiNormalization> kNmiNorms{
    {"arithmetic", NmiNormalization::Arithmetic}, {"max", NmiNormalization::Max}, {"min", NmiNormalization::Min}};
const std::map<std::string, CombineRule> kCombine{{"attach", CombineRule::Attach}, {"separate", CombineRule::Separate}};
const std::map<std::string, InBalanceRule> kInBalance{{"boundary", InBalanceRule::Boundary},
                                                       {"intra", InBalanceRule::IntraVsBoundary}};

void addEdges(CLI::App *cmd, ExperimentConfig &cfg, bool required = true) {
    auto *opt = cmd->add_option("--edges", cfg.edges, "Edge list `src dst [weight]`");
    if (required)
        opt->required();
    cmd->add_flag("--undirected", cfg.undirected, "Read each row as an undirected edge");
}

} // namespace

int main(int argc, char **argv) {
    ExperimentConfig cfg;
    CLI::App app{"Flow stability community detection for directed networks with missing links"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Flat key=value file mirroring the command-line flags");

    app.add_option("--seed", cfg.seed, "Master seed");
    app.add_option("--threads", cfg.threads, "Worker threads (0 = all cores)");
    app.add_option("--out-dir", cfg.outDir, "Output directory");
    app.add_option("--cov-mode", cfg.covMode, "Covariance: exact or linearized")
        ->transform(CLI::CheckedTransformer(kCovModes, CLI::ignore_case));
    app.add_option("--t-min", cfg.tMin, "Smallest Markov time");
    app.add_option("--t-max", cfg.tMax, "Largest Markov time");
    app.add_option("--t-count", cfg.tCount, "Number of Markov times");
    app.add_flag("--t-log,!--t-linear", cfg.tLog, "Logarithmic (default) or linear time grid");
    app.add_option("--n-runs", cfg.nRuns, "Louvain runs per Markov time and side");
    app.add_option("--combine", cfg.combine, "Placement of single-process nodes: attach or separate")
        ->transform(CLI::CheckedTransformer(kCombine, CLI::ignore_case));

    auto *cluster = app.add_subcommand("cluster", "Markov-time sweep of a graph");
    addEdges(cluster, cfg);
    cluster->add_option("--errors", cfg.errors, "Error file `node,epsilon[,epsilon_in]`");
    cluster->add_option("--method", cfg.method, "fs, delta or symmetric")
        ->transform(CLI::CheckedTransformer(kMethods, CLI::ignore_case));
    cluster->add_option("--in-balance", cfg.inBalance, "boundary or intra")
        ->transform(CLI::CheckedTransformer(kInBalance, CLI::ignore_case));

    auto *recovery = app.add_subcommand("recovery", "Plain vs error-aware recovery under random edge removal");
    addEdges(recovery, cfg);
    recovery->add_option("--ground-truth", cfg.groundTruth, "Reference partition JSON")->required();
    recovery->add_option("--r-grid", cfg.rGrid, "Removal fractions")->delimiter(',');
    recovery->add_option("--exclude-largest", cfg.excludeLargest, "Ignore nodes of the k largest reference clusters");
    recovery->add_option("--nmi-norm", cfg.nmiNorm, "arithmetic, max or min")
        ->transform(CLI::CheckedTransformer(kNmiNorms, CLI::ignore_case));

    auto *sbmGen = app.add_subcommand("sbm-gen", "Generate the double source-core-sink benchmark");
    sbmGen->add_option("--n", cfg.sbm.nTotal, "Number of nodes");
    sbmGen->add_option("--block-sizes", cfg.sbm.blockSizes, "Six block sizes")->delimiter(',')->expected(6);
    sbmGen->add_option("--p-in", cfg.sbm.pIn, "Within source/sink groups and between cores");
    sbmGen->add_option("--p-out", cfg.sbm.pOut, "Sources to own core, core to own sinks");
    sbmGen->add_option("--p-core", cfg.sbm.pCore, "Within each core");
    double coupling = -1.0;
    sbmGen->add_option("--coupling", coupling, "Cross-group probability (default p-out/4)");

    auto *remove = app.add_subcommand("remove-edges", "Remove a random fraction of edges and record the errors");
    addEdges(remove, cfg);
    remove->add_option("--fraction", cfg.removeFraction, "Fraction r in [0, 1)")->required();

    auto *estimate = app.add_subcommand("estimate-errors", "Errors from per-channel deletion counts");
    addEdges(estimate, cfg);
    estimate->add_option("--stats", cfg.stats, "CSV `node,n_deleted,n_observed,n_with_links`")->required();

    auto *compare = app.add_subcommand("compare", "NMI/NVI and Katz-ranked RBO of two partitions");
    compare->add_option("partitions", cfg.partitions, "Two partition files")->required()->expected(2);
    addEdges(compare, cfg, false);
    compare->add_option("--top-k", cfg.topK, "Largest clusters compared by RBO");
    compare->add_option("--rbo-p", cfg.rboP, "RBO persistence");
    compare->add_option("--exclude-largest", cfg.excludeLargest, "Ignore nodes of the k largest clusters of the first");
    double damping = -1.0;
    compare->add_option("--katz-damping", damping, "Katz damping (default 0.85 / spectral radius)");
    compare->add_option("--nmi-norm", cfg.nmiNorm, "arithmetic, max or min")
        ->transform(CLI::CheckedTransformer(kNmiNorms, CLI::ignore_case));

    auto *roles = app.add_subcommand("roles", "In-balance roles of the clusters of a partition");
    addEdges(roles, cfg);
    roles->add_option("partition", cfg.partitions, "Partition file")->required()->expected(1);
    roles->add_option("--in-balance", cfg.inBalance, "boundary or intra")
        ->transform(CLI::CheckedTransformer(kInBalance, CLI::ignore_case));

    auto *heatmap = app.add_subcommand("nvi-heatmap", "Pairwise NVI between partition files");
    heatmap->add_option("partitions", cfg.partitions, "Partition files")->required()->expected(2, -1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(Error::Category::Config);
    }
    if (coupling >= 0.0)
        cfg.sbm.coupling = coupling;
    if (damping > 0.0)
        cfg.katzDamping = damping;

    try {
        if (cluster->parsed()) {
            const SweepResult r = cmdCluster(cfg);
            std::cout << "optimal t=" << formatDouble(r.times[r.optimalIndex])
                      << " n_clusters=" << r.nClusters[r.optimalIndex] << '\n';
        } else if (recovery->parsed()) {
            const RecoveryGrid grid = cmdRecovery(cfg);
            for (std::size_t i = 0; i < grid.fractions.size(); ++i)
                std::cout << "r=" << formatDouble(grid.fractions[i]) << " max_nmi_fs=" << formatDouble(grid.maxFs(i))
                          << " max_nmi_delta=" << formatDouble(grid.maxDelta(i)) << '\n';
        } else if (sbmGen->parsed()) {
            auto [g, truth] = cmdSbmGen(cfg);
            std::cout << g.numberOfNodes() << " nodes, " << g.numberOfEdges() << " edges\n";
        } else if (remove->parsed()) {
            const DegradedGraph dg = cmdRemoveEdges(cfg);
            std::cout << dg.record.removedEdges.size() << " edges removed\n";
        } else if (estimate->parsed()) {
            cmdEstimateErrors(cfg);
        } else if (compare->parsed()) {
            std::cout << cmdCompare(cfg).json() << '\n';
        } else if (roles->parsed()) {
            cmdRoles(cfg);
        } else if (heatmap->parsed()) {
            cmdNviHeatmap(cfg);
        }
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exitCode();
    } catch (const std::filesystem::filesystem_error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(Error::Category::Io);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(Error::Category::Numerical);
    }
    return 0;
}
