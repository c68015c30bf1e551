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

#include <cmath>

#include <gtest/gtest.h>

#include <flowstab/sbm.hpp>

namespace flowstab {
namespace {

// Number of ordered pairs between two blocks (no self-loops).
double pairs(std::size_t a, std::size_t b, const std::vector<std::size_t> &sizes) {
    const double sa = static_cast<double>(sizes[a]), sb = static_cast<double>(sizes[b]);
    return a == b ? sa * (sa - 1) : sa * sb;
}

std::array<std::array<double, kBlocks>, kBlocks> blockCounts(const WeightedDigraph &g, const Partition &truth) {
    std::array<std::array<double, kBlocks>, kBlocks> c{};
    for (const Edge &e : g.edges())
        c[truth.labels[e.src]][truth.labels[e.dst]] += 1;
    return c;
}

TEST(Sbm, DefaultSizes) {
    EXPECT_EQ(defaultBlockSizes(200), (std::vector<std::size_t>{33, 34, 33, 33, 34, 33}));
    EXPECT_EQ(defaultBlockSizes(6), (std::vector<std::size_t>{1, 1, 1, 1, 1, 1}));
    SbmSpec bad;
    bad.blockSizes = {1, 2, 3};
    EXPECT_THROW(resolvedBlockSizes(bad), ConfigError);
    bad.blockSizes = {1, 1, 1, 1, 1, 1};
    EXPECT_THROW(resolvedBlockSizes(bad), ConfigError);
}

TEST(Sbm, BlockMatrixEntries) {
    SbmSpec spec;
    auto m = blockProbabilityMatrix(spec);
    EXPECT_EQ(m[Core1][Core2], spec.pIn);
    EXPECT_EQ(m[Core2][Core1], spec.pIn);
    EXPECT_EQ(m[Sources1][Core2], spec.pOut / 4);
    EXPECT_EQ(m[Core1][Sinks2], spec.pOut / 4);
    EXPECT_EQ(m[Sources1][Core1], spec.pOut);
    EXPECT_EQ(m[Core1][Core1], spec.pCore);
    for (std::size_t b = 0; b < kBlocks; ++b) {
        // sinks only link among themselves; nothing enters a source group
        // from outside
        if (b != Sinks1)
            EXPECT_EQ(m[Sinks1][b], 0.0);
        if (b != Sources1)
            EXPECT_EQ(m[b][Sources1], 0.0);
    }
    spec.coupling = 0.07;
    EXPECT_EQ(blockProbabilityMatrix(spec)[Sources2][Core1], 0.07);
    spec.pCore = 1.5;
    EXPECT_THROW(blockProbabilityMatrix(spec), ConfigError);
}

TEST(Sbm, EmptyWhenAllZero) {
    SbmSpec spec;
    spec.pIn = spec.pOut = spec.pCore = 0;
    auto [g, truth] = generateSbm(spec);
    EXPECT_EQ(g.numberOfEdges(), 0u);
    EXPECT_EQ(g.numberOfNodes(), 200u);
    EXPECT_EQ(truth.numberOfClusters(), 6u);
}

TEST(Sbm, SaturatedIsCompleteOverAllowedPairs) {
    SbmSpec spec;
    spec.nTotal = 30;
    spec.pIn = spec.pOut = spec.pCore = 1;
    spec.coupling = 1;
    auto [g, truth] = generateSbm(spec);
    const auto sizes = resolvedBlockSizes(spec);
    const auto m = blockProbabilityMatrix(spec);
    double expected = 0;
    for (std::size_t a = 0; a < kBlocks; ++a)
        for (std::size_t b = 0; b < kBlocks; ++b)
            if (m[a][b] > 0)
                expected += pairs(a, b, sizes);
    EXPECT_EQ(static_cast<double>(g.numberOfEdges()), expected);
    for (const Edge &e : g.edges())
        EXPECT_NE(e.src, e.dst);
}

TEST(Sbm, BinomialMoments) {
    SbmSpec spec;
    const auto sizes = resolvedBlockSizes(spec);
    const auto m = blockProbabilityMatrix(spec);
    std::array<std::array<double, kBlocks>, kBlocks> total{};
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        spec.seed = static_cast<std::uint64_t>(s);
        auto [g, truth] = generateSbm(spec);
        auto c = blockCounts(g, truth);
        for (std::size_t a = 0; a < kBlocks; ++a)
            for (std::size_t b = 0; b < kBlocks; ++b) {
                const double n = pairs(a, b, sizes), p = m[a][b];
                const double mean = n * p, sd = std::sqrt(n * p * (1 - p));
                EXPECT_LE(std::abs(c[a][b] - mean), 4 * sd + 1e-12) << a << "," << b;
                total[a][b] += c[a][b];
            }
    }
    // pooled over seeds the tolerance shrinks by sqrt(20)
    for (std::size_t a = 0; a < kBlocks; ++a)
        for (std::size_t b = 0; b < kBlocks; ++b) {
            const double n = pairs(a, b, sizes) * seeds, p = m[a][b];
            EXPECT_LE(std::abs(total[a][b] - n * p), 4 * std::sqrt(n * p * (1 - p)) + 1e-12);
        }
}

TEST(Sbm, DeterministicPerSeed) {
    SbmSpec spec;
    spec.seed = 5;
    auto a = generateSbm(spec).first, b = generateSbm(spec).first;
    EXPECT_EQ(a.edges(), b.edges());
    spec.seed = 6;
    EXPECT_NE(generateSbm(spec).first.edges(), a.edges());
}

} // namespace
} // namespace flowstab
