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

// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,4,7] [--strict] [--out DIR] [--log FILE]
//
// Exits 0 once every criterion has been evaluated; with --strict any FAIL
// gives exit code 1. Criteria 1, 2 and 10 run full 50-run sweeps on ten
// 200-node SBMs and dominate the runtime.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <flowstab/experiments.hpp>

namespace fs = std::filesystem;
using namespace flowstab;
using Eigen::MatrixXd;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

constexpr std::uint64_t kSeeds = 10;
constexpr double kOne = 1.0 - 1e-12;

fs::path gOut;

SbmSpec paperSbm(std::uint64_t seed) {
    SbmSpec s;
    s.nTotal = 200;
    s.pCore = 0.4;
    s.pIn = 0.1;
    s.pOut = 0.2;
    s.seed = seed;
    return s;
}

RecoveryOptions recoveryOptions(double r, std::uint64_t seed) {
    RecoveryOptions opt;
    opt.fractions = {r};
    opt.sweep.nRuns = 50;
    opt.sweep.seed = seed;
    return opt;
}

// Per-seed recovery grids at removal fraction r, written under dir.
std::vector<RecoveryGrid> recoverySeeds(double r, const fs::path &dir) {
    std::vector<RecoveryGrid> out;
    for (std::uint64_t s = 1; s <= kSeeds; ++s) {
        auto [g, truth] = generateSbm(paperSbm(s));
        out.push_back(runRecovery(g, truth, recoveryOptions(r, s)));
        writeRecovery(dir / ("seed_" + std::to_string(s)), out.back());
    }
    return out;
}

std::string maxList(const std::vector<RecoveryGrid> &grids) {
    std::ostringstream os;
    os.precision(4);
    for (const auto &gr : grids)
        os << ' ' << gr.maxFs(0) << '/' << gr.maxDelta(0);
    return os.str();
}

Verdict criterion1() {
    auto grids = recoverySeeds(0.05, gOut / "c1_run_a");
    int deltaOne = 0, fsBelow = 0;
    for (const auto &gr : grids) {
        deltaOne += gr.maxDelta(0) >= kOne;
        fsBelow += gr.maxFs(0) < kOne;
    }
    std::ostringstream os;
    os << "dFS max-NMI=1 in " << deltaOne << "/10, FS max-NMI<1 in " << fsBelow << "/10; fs/dfs:" << maxList(grids);
    return {deltaOne >= 7 && fsBelow >= 7, os.str()};
}

Verdict criterion2() {
    auto grids = recoverySeeds(0.35, gOut / "c2");
    int deltaOne = 0;
    for (const auto &gr : grids)
        deltaOne += gr.maxDelta(0) >= kOne;
    std::ostringstream os;
    os << "dFS max-NMI=1 in " << deltaOne << "/10; fs/dfs:" << maxList(grids);
    return {deltaOne >= 5, os.str()};
}

// Maximal runs of consecutive times whose pairwise NVI is zero, length >= 2.
std::vector<std::pair<std::size_t, std::size_t>> zeroBlocks(const MatrixXd &h, double tol) {
    std::vector<std::pair<std::size_t, std::size_t>> blocks;
    const auto n = static_cast<std::size_t>(h.rows());
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        auto fits = [&](std::size_t k) {
            for (std::size_t a = i; a < k; ++a)
                if (h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(k)) > tol)
                    return false;
            return true;
        };
        while (j + 1 < n && fits(j + 1))
            ++j;
        if (j > i)
            blocks.emplace_back(i, j);
        i = j + 1;
    }
    return blocks;
}

Verdict criterion3() {
    std::ostringstream os;
    int passing = 0;
    for (std::uint64_t s = 1; s <= kSeeds; ++s) {
        auto [g, truth] = generateSbm(paperSbm(s));
        SweepOptions opt;
        opt.nRuns = 50;
        opt.seed = s;
        SweepResult r = sweep(g, std::nullopt, opt);
        const auto blocks = zeroBlocks(nviHeatmap(r.partitions), 1e-9);
        os << " seed" << s << ":" << blocks.size();
        passing += blocks.size() >= 3;
        if (s == 1)
            writeSweep(gOut / "c3", r, g);
    }
    // the paper's figure is one realization; require it for a majority of seeds
    return {passing * 2 > static_cast<int>(kSeeds), "zero-NVI diagonal blocks per seed:" + os.str()};
}

WeightedDigraph randomDigraph(std::mt19937_64 &rng, std::size_t n, double density) {
    std::uniform_real_distribution<double> w(0.5, 3.0), coin(0.0, 1.0);
    std::vector<Edge> edges;
    for (node_t u = 0; u < n; ++u)
        for (node_t v = 0; v < n; ++v)
            if (u != v && coin(rng) < density)
                edges.push_back({u, v, w(rng)});
    return WeightedDigraph::fromEdges(n, edges);
}

WeightedDigraph randomErgodic(std::mt19937_64 &rng, std::size_t n, double density) {
    std::uniform_real_distribution<double> w(0.5, 3.0), coin(0.0, 1.0);
    std::vector<Edge> edges;
    for (node_t u = 0; u < n; ++u)
        edges.push_back({u, (u + 1) % n, w(rng)});
    for (node_t u = 0; u < n; ++u)
        for (node_t v = 0; v < n; ++v)
            if (coin(rng) < density)
                edges.push_back({u, v, w(rng)});
    return WeightedDigraph::fromEdges(n, edges);
}

Verdict criterion4() {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<std::size_t> size(3, 50);
    std::uniform_real_distribution<double> dens(0.05, 0.3);
    double genDiff = 0.0, covDiff = 0.0;
    int partitionMismatch = 0, tested = 0;
    for (int c = 0; c < 100; ++c) {
        auto g = randomDigraph(rng, size(rng), dens(rng));
        const ErrorVector zero = ErrorVector::zeros(g.numberOfNodes());
        ReducedGraph fsGraph;
        try {
            fsGraph = reduceForwardFs(g);
        } catch (const Error &) {
            // nothing left after peeling; the uncertain reduction must agree
            bool rejected = false;
            try {
                reduceForwardDelta(g, zero);
            } catch (const Error &) {
                rejected = true;
            }
            partitionMismatch += !rejected;
            continue;
        }
        ++tested;
        const Generator a = buildFsForward(fsGraph);
        const Generator b = buildDeltaForward(reduceForwardDelta(g, zero), zero).first;
        if (a.size() != b.size()) {
            ++partitionMismatch;
            continue;
        }
        genDiff = std::max(genDiff, (a.toDense() - b.toDense()).cwiseAbs().maxCoeff());
        const Eigen::RowVectorXd p0 = Eigen::RowVectorXd::Constant(a.size(), 1.0 / static_cast<double>(a.size()));
        const double t = std::pow(10.0, -1.0 + 2.0 * c / 99.0);
        auto sa = covarianceExact(a, p0, t, UnreachablePolicy::Clamp);
        auto sb = covarianceExact(b, p0, t, UnreachablePolicy::Clamp);
        covDiff = std::max(covDiff, (sa.S.toDense() - sb.S.toDense()).cwiseAbs().maxCoeff());
        const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(c);
        if (bestOf(sa.S, 10, seed).labels != bestOf(sb.S, 10, seed).labels)
            ++partitionMismatch;

        SweepOptions opt;
        opt.times = {0.1, 1.0, 10.0};
        opt.nRuns = 5;
        opt.seed = seed;
        // both methods must agree, including on graphs they both reject
        auto run = [&](Method m) -> std::pair<std::string, SweepResult> {
            opt.method = m;
            try {
                return {"", sweep(g, m == Method::Delta ? std::optional<ErrorVector>(zero) : std::nullopt, opt)};
            } catch (const Error &err) {
                return {err.what(), {}};
            }
        };
        auto [ef, rf] = run(Method::Fs);
        auto [ed, rd] = run(Method::Delta);
        if (ef != ed) {
            ++partitionMismatch;
            continue;
        }
        for (std::size_t k = 0; k < rf.times.size(); ++k)
            if (rf.ok(k) != rd.ok(k) || (rf.ok(k) && rf.partitions[k].labels != rd.partitions[k].labels))
                ++partitionMismatch;
    }
    std::ostringstream os;
    os << tested << " graphs; max generator diff " << genDiff << ", max covariance diff " << covDiff
       << ", partition mismatches " << partitionMismatch;
    return {genDiff <= 1e-15 && covDiff <= 1e-15 && partitionMismatch == 0, os.str()};
}

ErrorVector randomErrors(std::mt19937_64 &rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ErrorVector e = ErrorVector::zeros(n);
    for (auto &x : e.epsOut)
        x = u(rng) < 0.5 ? 0.0 : 3.0 * u(rng);
    return e;
}

Verdict criterion5() {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> size(3, 30);
    const double t = 1e-2;
    double worst = 1e300;
    for (int c = 0; c < 20; ++c) {
        const std::size_t n = size(rng);
        auto g = randomErgodic(rng, n, 0.2);
        const ErrorVector e = randomErrors(rng, n);
        const Generator gen = buildDeltaForward(reduceForwardDelta(g, e), e).first;
        const auto st = stationary(gen, 1e-15, 1000000);
        auto err = [&](double tt) {
            const MatrixXd lin = covarianceLinearized(gen, st, tt).S.toDense();
            const MatrixXd ex = covarianceExact(gen, st.pi, tt).S.toDense();
            return (lin - ex).cwiseAbs().maxCoeff();
        };
        worst = std::min(worst, err(t) / err(t / 2));
    }
    std::ostringstream os;
    os << "min err(t)/err(t/2) over 20 generators = " << worst;
    return {worst >= 3.5, os.str()};
}

Verdict criterion6() {
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<std::size_t> size(3, 40);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double asym = 0.0, rows = 0.0, trans = 0.0;
    for (int c = 0; c < 50; ++c) {
        const std::size_t n = size(rng);
        auto g = randomErgodic(rng, n, 0.15);
        const ErrorVector e = randomErrors(rng, n);
        const Generator gen = c % 2 ? buildDeltaForward(reduceForwardDelta(g, e), e).first
                                    : buildFsForward(reduceForwardFs(g));
        const auto st = stationary(gen, 1e-13, 1000000, false);
        const double tExact = std::pow(10.0, -2.0 + 4.0 * u(rng));
        const double tLin = u(rng);
        const Eigen::RowVectorXd p0 = Eigen::RowVectorXd::Constant(gen.size(), 1.0 / static_cast<double>(n));
        for (const auto &cov : {covarianceExact(gen, p0, tExact), covarianceLinearized(gen, st, tLin)}) {
            const MatrixXd s = cov.S.toDense();
            asym = std::max(asym, (s - s.transpose()).cwiseAbs().maxCoeff());
            rows = std::max(rows, cov.S.rowSums().cwiseAbs().maxCoeff());
        }
        const double ts = estimateTs(gen, st);
        for (const MatrixXd &tm : {transitionExact(gen, tExact), transitionLinearized(gen, st, 10.0 * tLin, ts)})
            trans = std::max(trans, (tm.rowwise().sum().array() - 1.0).abs().maxCoeff());
    }
    std::ostringstream os;
    os << "max |S-S^T| " << asym << ", max |S 1| " << rows << ", max |T 1 - 1| " << trans;
    return {asym <= 1e-10 && rows <= 1e-10 && trans <= 1e-10, os.str()};
}

double bruteForceBest(const MatrixXd &s) {
    const int n = static_cast<int>(s.rows());
    std::vector<int> a(n, 0), maxPrefix(n, 0);
    double best = -1e300;
    while (true) {
        double q = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (a[i] == a[j])
                    q += s(i, j);
        best = std::max(best, q);
        int i = n - 1;
        while (i > 0 && a[i] > maxPrefix[i - 1])
            --i;
        if (i == 0)
            return best;
        ++a[i];
        for (int j = i + 1; j < n; ++j)
            a[j] = 0;
        for (int j = i; j < n; ++j)
            maxPrefix[j] = std::max(maxPrefix[j - 1], a[j]);
    }
}

Verdict criterion7() {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> size(2, 8);
    std::normal_distribution<double> z;
    int hits = 0;
    for (int c = 0; c < 50; ++c) {
        const int n = size(rng);
        MatrixXd m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j)
                m(i, j) = m(j, i) = z(rng);
        const Eigen::VectorXd r = m.rowwise().sum() / n;
        const double mean = r.sum() / n;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                m(i, j) -= r[i] + r[j] - mean;
        const Partition p = bestOf(SymmetricMatrix::fromDense(m), 200, static_cast<std::uint64_t>(c));
        hits += std::abs(p.quality - bruteForceBest(m)) <= 1e-10;
    }
    return {hits >= 48, std::to_string(hits) + "/50 match the exhaustive optimum"};
}

Verdict criterion8() {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> lab(0, 4);
    std::vector<std::string> broken;
    auto randomLabels = [&](std::size_t n) {
        std::vector<int> v(n);
        for (int &x : v)
            x = lab(rng);
        return v;
    };
    double worstTriangle = 0.0, worstRelabel = 0.0;
    for (int c = 0; c < 1000; ++c) {
        const auto a = randomLabels(12), b = randomLabels(12), d = randomLabels(12);
        worstTriangle = std::max(worstTriangle, nvi(a, d) - nvi(a, b) - nvi(b, d));
        std::vector<int> perm{3, 0, 4, 1, 2}, ra(a.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            ra[i] = perm[static_cast<std::size_t>(a[i])];
        worstRelabel = std::max({worstRelabel, std::abs(nmi(ra, b) - nmi(a, b)), std::abs(nvi(ra, b) - nvi(a, b))});
    }
    if (worstTriangle > 1e-12)
        broken.push_back("triangle");
    if (worstRelabel > 1e-12)
        broken.push_back("relabeling");
    const std::vector<std::string> l1{"a", "b", "c", "d"}, l2{"e", "f", "g"};
    if (rbo(l1, l1, 0.9) != 1.0)
        broken.push_back("rbo identical");
    if (rbo(l1, l2, 0.9) != 0.0)
        broken.push_back("rbo disjoint");
    const std::vector<int> x{0, 0, 1, 1}, y{0, 1, 0, 1};
    if (nvi(x, y) != 1.0)
        broken.push_back("nvi cross");
    std::ostringstream os;
    os << "max triangle violation " << worstTriangle << ", max relabel change " << worstRelabel;
    for (const auto &b : broken)
        os << "; broken: " << b;
    return {broken.empty(), os.str()};
}

Verdict criterion9() {
    const std::size_t n = 50000;
    std::mt19937_64 rng(9);
    std::vector<Edge> edges;
    edges.reserve(n * 10);
    for (node_t u = 0; u < n; ++u)
        for (int k = 0; k < 10; ++k) {
            const node_t v = uniformBelow(rng, n);
            if (v != u)
                edges.push_back({u, v, 1.0});
        }
    auto g = WeightedDigraph::fromEdges(n, std::move(edges));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ErrorVector e = ErrorVector::zeros(n);
    for (auto &x : e.epsOut)
        x = u(rng) < 0.3 ? u(rng) * 2.0 : 0.0;

    SweepOptions opt;
    opt.method = Method::Delta;
    opt.covMode = CovarianceMode::Linearized;
    opt.times = makeTimeGrid(1e-2, 1.0, 10);
    opt.nRuns = 5;
    opt.seed = 9;
    const auto start = std::chrono::steady_clock::now();
    SweepResult r = sweep(g, e, opt);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool allOk = true;
    for (std::size_t k = 0; k < r.times.size(); ++k)
        allOk = allOk && r.ok(k);
    std::ostringstream os;
    os << g.numberOfEdges() << " edges, 10 times x 5 runs in " << secs << " s; clusters at t=1: " << r.nClusters.back();
    return {allOk && secs <= 1800.0, os.str()};
}

bool sameBytes(const fs::path &a, const fs::path &b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    return fa && fb && sa.str() == sb.str();
}

Verdict criterion10() {
    if (!fs::exists(gOut / "c1_run_a"))
        recoverySeeds(0.05, gOut / "c1_run_a");
    recoverySeeds(0.05, gOut / "c1_run_b");
    int files = 0, differ = 0;
    for (const auto &entry : fs::recursive_directory_iterator(gOut / "c1_run_a")) {
        if (!entry.is_regular_file())
            continue;
        ++files;
        differ += !sameBytes(entry.path(), gOut / "c1_run_b" / fs::relative(entry.path(), gOut / "c1_run_a"));
    }
    return {files > 0 && differ == 0, std::to_string(files) + " CSVs compared, " + std::to_string(differ) + " differ"};
}

} // namespace

int main(int argc, char **argv) {
    std::set<int> only;
    bool strict = false;
    std::ofstream log;
    gOut = fs::temp_directory_path() / "flowstab_acceptance";
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--strict") {
            strict = true;
        } else if (a == "--only" && i + 1 < argc) {
            for (const auto &tok : io::splitCsv(argv[++i]))
                only.insert(std::stoi(tok));
        } else if (a == "--out" && i + 1 < argc) {
            gOut = argv[++i];
        } else if (a == "--log" && i + 1 < argc) {
            log.open(argv[++i]);
            if (!log) {
                std::cerr << "cannot open log file " << argv[i] << '\n';
                return 4;
            }
        } else {
            std::cerr << "usage: acceptance [--only 1,2,...] [--strict] [--out DIR] [--log FILE]\n";
            return 2;
        }
    }
    fs::remove_all(gOut);
    fs::create_directories(gOut);
    setWarningHandler([](std::string_view) {});

    const std::vector<std::function<Verdict()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                          criterion5, criterion6, criterion7, criterion8,
                                                          criterion9, criterion10};
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id))
            continue;
        Verdict v;
        const auto start = std::chrono::steady_clock::now();
        try {
            v = criteria[i]();
        } catch (const std::exception &err) {
            v = {false, std::string("exception: ") + err.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !v.pass;
        std::ostringstream line;
        line << "criterion " << id << ": " << (v.pass ? "PASS" : "FAIL") << " (" << static_cast<int>(secs) << " s) "
             << v.detail;
        std::cout << line.str() << std::endl;
        if (log)
            log << line.str() << std::endl;
    }
    return strict && failed > 0 ? 1 : 0;
}
