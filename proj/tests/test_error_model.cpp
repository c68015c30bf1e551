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

#include <flowstab/error_model.hpp>
#include <flowstab/sbm.hpp>

namespace flowstab {
namespace {

WeightedDigraph weighted() {
    return WeightedDigraph::fromEdges(4, {{0, 1, 2}, {0, 2, 1}, {1, 2, 3}, {2, 3, 0.5}, {3, 0, 1}, {3, 1, 4}});
}

TEST(Removal, ZeroFractionIsIdentity) {
    auto g = weighted();
    auto d = removeRandomEdges(g, 0.0, 1);
    EXPECT_EQ(d.graph.edges(), g.edges());
    EXPECT_EQ(d.errors.epsOut, std::vector<double>(4, 0.0));
    EXPECT_TRUE(d.record.removedEdges.empty());
}

TEST(Removal, Bookkeeping) {
    auto g = weighted();
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto d = removeRandomEdges(g, 0.5, seed);
        EXPECT_EQ(d.record.removedEdges.size(), 3u);
        EXPECT_EQ(d.graph.numberOfNodes(), 4u);
        double removedWeight = 0, eps = 0;
        for (const Edge &e : d.record.removedEdges)
            removedWeight += e.weight;
        for (std::size_t i = 0; i < 4; ++i) {
            eps += d.errors.epsOut[i];
            EXPECT_DOUBLE_EQ(d.graph.outStrength(i) + d.errors.epsOut[i], g.outStrength(i));
        }
        EXPECT_DOUBLE_EQ(eps, removedWeight);
    }
}

TEST(Removal, BadFraction) {
    EXPECT_THROW(removeRandomEdges(weighted(), 1.0, 0), ConfigError);
    EXPECT_THROW(removeRandomEdges(weighted(), -0.1, 0), ConfigError);
}

TEST(Removal, HypergeometricMoments) {
    // 100 unit edges; node i owns outDegree(i) of them. Removing 35 edges
    // uniformly gives per-node removals ~ Hypergeometric(100, d_i, 35).
    SbmSpec spec;
    spec.nTotal = 30;
    spec.pIn = spec.pOut = spec.pCore = 0.5;
    spec.seed = 3;
    auto full = generateSbm(spec).first;
    ASSERT_GE(full.numberOfEdges(), 100u);
    std::vector<Edge> edges(full.edges().begin(), full.edges().begin() + 100);
    auto g = WeightedDigraph::fromEdges(30, edges);
    ASSERT_EQ(g.numberOfEdges(), 100u);
    const int trials = 1000;
    std::vector<double> sum(30, 0.0);
    for (int s = 0; s < trials; ++s) {
        auto d = removeRandomEdges(g, 0.35, static_cast<std::uint64_t>(s));
        ASSERT_EQ(d.record.removedEdges.size(), 35u);
        for (std::size_t i = 0; i < 30; ++i)
            sum[i] += d.errors.epsOut[i];
    }
    const double N = 100, n = 35;
    for (std::size_t i = 0; i < 30; ++i) {
        const double K = static_cast<double>(g.outDegree(i));
        const double mean = n * K / N;
        const double var = n * (K / N) * (1 - K / N) * (N - n) / (N - 1);
        EXPECT_LE(std::abs(sum[i] / trials - mean), 4 * std::sqrt(var / trials) + 1e-12) << i;
    }
}

TEST(Estimate, DirectProduct) {
    WeightedDigraph g({"a", "b", "c"}, {{0, 1, 1}});
    std::vector<ChannelStats> stats{{"a", 10, 100, 40}, {"b", 0, 50, 10}};
    int warnings = 0;
    setWarningHandler([&](std::string_view ) { ++warnings; });
    auto e = estimateErrors(stats, g);
    setWarningHandler(nullptr);
    EXPECT_DOUBLE_EQ(e.epsOut[0], 4.0);
    EXPECT_EQ(e.epsOut[1], 0.0);
    EXPECT_EQ(e.epsOut[2], 0.0);
    EXPECT_EQ(warnings, 1); // c has no row
}

TEST(Estimate, UnobservedWarns) {
    WeightedDigraph g({"a"}, {});
    std::string message;
    setWarningHandler([&](std::string_view m) { message = m; });
    auto e = estimateErrors({{"a", 50, 0, 0}}, g);
    setWarningHandler(nullptr);
    EXPECT_EQ(e.epsOut[0], 0.0);
    EXPECT_NE(message.find("no observed posts"), std::string::npos);
}

TEST(Estimate, InvalidCounts) {
    WeightedDigraph g({"a"}, {});
    EXPECT_THROW(estimateErrors({{"a", -1, 10, 1}}, g), ConfigError);
    EXPECT_THROW(estimateErrors({{"a", 1, 10, 11}}, g), ConfigError);
}

} // namespace
} // namespace flowstab
