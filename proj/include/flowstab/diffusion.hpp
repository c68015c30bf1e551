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

#ifndef FLOWSTAB_DIFFUSION_HPP_
#define FLOWSTAB_DIFFUSION_HPP_

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/MatrixFunctions>

#include "common.hpp"
#include "graph.hpp"
#include "symmetric_matrix.hpp"

namespace flowstab {

enum class Direction { Forward, Backward };
enum class ProcessKind { Fs, Delta, Symmetric };

using RowSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/**
 * Row-stochastic one-step matrix of a random walk with optional
 * teleportation, stored as
 *
 *     M = walk + teleportProb * teleportTarget^T
 *
 * where `walk` holds the (1 - a_i)-scaled edge-following part and the
 * teleport term is rank one. Plain flow-stability generators have a = 0.
 */
struct Generator {
    RowSparse walk;
    Eigen::VectorXd teleportProb;
    Eigen::VectorXd teleportTarget;
    Direction direction = Direction::Forward;
    ProcessKind kind = ProcessKind::Fs;

    Eigen::Index size() const noexcept { return walk.rows(); }

    bool hasTeleport() const { return teleportProb.size() > 0 && teleportProb.maxCoeff() > 0.0; }

    Eigen::MatrixXd toDense() const {
        Eigen::MatrixXd m = Eigen::MatrixXd(walk);
        if (teleportProb.size() > 0)
            m.noalias() += teleportProb * teleportTarget.transpose();
        return m;
    }

    /// Row vector times M.
    Eigen::RowVectorXd leftMultiply(const Eigen::RowVectorXd &x) const {
        Eigen::RowVectorXd y = x * walk;
        if (teleportProb.size() > 0)
            y += x.dot(teleportProb) * teleportTarget.transpose();
        return y;
    }

    Eigen::VectorXd rowSums() const {
        Eigen::VectorXd r = walk * Eigen::VectorXd::Ones(size());
        if (teleportProb.size() > 0)
            r += teleportProb * teleportTarget.sum();
        return r;
    }
};

/// Teleportation probabilities and landing weights of a generator with
/// uncertainty. Landing probability of node j is targetWeights[j]/normalizer.
struct TeleportProfile {
    Eigen::VectorXd alpha;
    Eigen::VectorXd targetWeights;
    double normalizer = 0.0;
};

struct StationaryDistribution {
    Eigen::RowVectorXd pi;
    double residual = 0.0;
    std::size_t iterations = 0;
};

namespace detail {

inline Generator makeGenerator(Eigen::Index n, std::vector<Eigen::Triplet<double>> &triplets, Direction dir,
                               ProcessKind kind) {
    Generator gen;
    gen.walk.resize(n, n);
    gen.walk.setFromTriplets(triplets.begin(), triplets.end());
    gen.walk.makeCompressed();
    gen.direction = dir;
    gen.kind = kind;
    gen.teleportProb = Eigen::VectorXd::Zero(n);
    gen.teleportTarget = Eigen::VectorXd::Zero(n);
    return gen;
}

// Edge-following part of the forward walk: row i = (1 - keep_i) A(i,.)/s_out_i.
inline std::vector<Eigen::Triplet<double>> forwardWalkTriplets(const WeightedDigraph &g,
                                                                const Eigen::VectorXd *teleport) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(g.numberOfEdges());
    for (node_t i = 0; i < g.numberOfNodes(); ++i) {
        const double s = g.outStrength(i);
        if (s == 0.0)
            continue;
        const double keep = teleport ? 1.0 - (*teleport)[i] : 1.0;
        for (const Edge &e : g.outEdges(i))
            t.emplace_back(static_cast<int>(i), static_cast<int>(e.dst), keep * e.weight / s);
    }
    return t;
}

// Reverse walk: row j = (1 - keep_j) A(.,j)^T / s_in_j.
inline std::vector<Eigen::Triplet<double>> backwardWalkTriplets(const WeightedDigraph &g,
                                                                 const Eigen::VectorXd *teleport) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(g.numberOfEdges());
    for (node_t j = 0; j < g.numberOfNodes(); ++j) {
        const double s = g.inStrength(j);
        if (s == 0.0)
            continue;
        const double keep = teleport ? 1.0 - (*teleport)[j] : 1.0;
        g.forInEdges(j, [&](node_t src, double w) {
            t.emplace_back(static_cast<int>(j), static_cast<int>(src), keep * w / s);
        });
    }
    return t;
}

// err/(err + strength); zero when both vanish.
inline double errorRatio(double err, double strength) {
    const double denom = err + strength;
    return denom > 0.0 ? err / denom : 0.0;
}

} // namespace detail

/// Forward flow-stability generator D_out^{-1} A_f.
inline Generator buildFsForward(const ReducedGraph &rg) {
    const WeightedDigraph &g = rg.graph;
    for (node_t i = 0; i < g.numberOfNodes(); ++i)
        if (g.outStrength(i) <= 0.0)
            throw NumericalError("zero out-strength row '" + g.label(i) + "' in forward process");
    auto t = detail::forwardWalkTriplets(g, nullptr);
    return detail::makeGenerator(static_cast<Eigen::Index>(g.numberOfNodes()), t, Direction::Forward, ProcessKind::Fs);
}

/// Backward flow-stability generator D_in^{-1} A_b^T.
inline Generator buildFsBackward(const ReducedGraph &rg) {
    const WeightedDigraph &g = rg.graph;
    for (node_t j = 0; j < g.numberOfNodes(); ++j)
        if (g.inStrength(j) <= 0.0)
            throw NumericalError("zero in-strength row '" + g.label(j) + "' in backward process");
    auto t = detail::backwardWalkTriplets(g, nullptr);
    return detail::makeGenerator(static_cast<Eigen::Index>(g.numberOfNodes()), t, Direction::Backward,
                                 ProcessKind::Fs);
}

/**
 * Forward generator with uncertainty-driven teleportation:
 *
 *     M_ij = (1 - a_i) A(i,j)/s_out_i + a_i s_in_j / sum_l s_in_l,
 *     a_i  = eps_i / (eps_i + s_out_i),
 *
 * with strengths taken within the reduced graph. `e` is indexed by the
 * original graph. Nodes with zero out-strength teleport with probability one.
 */
inline std::pair<Generator, TeleportProfile> buildDeltaForward(const ReducedGraph &rg, const ErrorVector &e) {
    const WeightedDigraph &g = rg.graph;
    const Eigen::Index n = static_cast<Eigen::Index>(g.numberOfNodes());
    if (e.epsOut.size() != rg.toReduced.size())
        throw ConfigError("error vector length does not match the original graph");

    TeleportProfile prof;
    prof.alpha.resize(n);
    prof.targetWeights.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double eps = e.epsOut[rg.kept[i]];
        if (!(eps >= 0.0))
            throw ConfigError("negative error on node '" + g.label(i) + "'");
        const double s = g.outStrength(i);
        if (s + eps <= 0.0)
            throw NumericalError("node '" + g.label(i) + "' has neither out-strength nor error");
        prof.alpha[i] = detail::errorRatio(eps, s);
        prof.targetWeights[i] = g.inStrength(i);
    }
    prof.normalizer = prof.targetWeights.sum();
    if (!(prof.normalizer > 0.0))
        throw NumericalError("no teleport targets: total in-strength is zero");

    auto t = detail::forwardWalkTriplets(g, &prof.alpha);
    Generator gen = detail::makeGenerator(n, t, Direction::Forward, ProcessKind::Delta);
    gen.teleportProb = prof.alpha;
    gen.teleportTarget = prof.targetWeights / prof.normalizer;
    return {std::move(gen), std::move(prof)};
}

/// Backward domain for the symmetric variant: iteratively drop nodes with
/// zero in-strength and zero in-strength error.
inline ReducedGraph reduceBackwardDelta(const WeightedDigraph &g, const ErrorVector &e) {
    e.validate(g.numberOfNodes());
    if (!e.epsIn)
        return reduceBackward(g);
    std::vector<bool> protect(g.numberOfNodes());
    for (node_t u = 0; u < g.numberOfNodes(); ++u)
        protect[u] = (*e.epsIn)[u] > 0.0;
    ReducedGraph rg = detail::induce(g, detail::peel(g, false, protect));
    if (rg.size() == 0)
        throw NumericalError("backward process empty");
    return rg;
}

/**
 * Generators of the variant with errors on both strengths. With
 * w_i = epsOut_i/(epsOut_i + s_out_i) and c_j = epsIn_j/(epsIn_j + s_in_j):
 *
 *     forward:  M_ij = (1 - w_i) A(i,j)/s_out_i + w_i c_j / sum c
 *     backward: M_ij = (1 - c_i) A(j,i)/s_in_i  + c_i w_j / sum w
 *
 * Each direction evaluates strengths on its own reduced graph.
 */
inline std::pair<Generator, Generator> buildSymmetric(const ReducedGraph &rgForward, const ReducedGraph &rgBackward,
                                                      const ErrorVector &e) {
    if (!e.epsIn)
        throw ConfigError("symmetric variant needs in-strength errors");
    const std::vector<double> &alpha = e.epsOut;
    const std::vector<double> &beta = *e.epsIn;
    if (alpha.size() != rgForward.toReduced.size() || beta.size() != rgForward.toReduced.size() ||
        rgBackward.toReduced.size() != rgForward.toReduced.size())
        throw ConfigError("error vectors do not match the original graph");

    auto side = [&](const ReducedGraph &rg, bool forward) {
        const WeightedDigraph &g = rg.graph;
        const Eigen::Index n = static_cast<Eigen::Index>(g.numberOfNodes());
        Eigen::VectorXd omega(n), chi(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const node_t o = rg.kept[i];
            if (!(alpha[o] >= 0.0) || !(beta[o] >= 0.0))
                throw ConfigError("negative error on node '" + g.label(i) + "'");
            omega[i] = detail::errorRatio(alpha[o], g.outStrength(i));
            chi[i] = detail::errorRatio(beta[o], g.inStrength(i));
            const double own = forward ? g.outStrength(i) + alpha[o] : g.inStrength(i) + beta[o];
            if (own <= 0.0)
                throw NumericalError("node '" + g.label(i) + "' has neither strength nor error");
        }
        const Eigen::VectorXd &leave = forward ? omega : chi;
        const Eigen::VectorXd &land = forward ? chi : omega;
        const double z = land.sum();
        if (leave.maxCoeff() > 0.0 && !(z > 0.0))
            throw NumericalError("no teleport targets with nonzero error");
        auto t = forward ? detail::forwardWalkTriplets(g, &leave) : detail::backwardWalkTriplets(g, &leave);
        Generator gen = detail::makeGenerator(n, t, forward ? Direction::Forward : Direction::Backward,
                                              ProcessKind::Symmetric);
        gen.teleportProb = leave;
        gen.teleportTarget = z > 0.0 ? Eigen::VectorXd(land / z) : Eigen::VectorXd::Zero(n);
        return gen;
    };
    return {side(rgForward, true), side(rgBackward, false)};
}

/**
 * Stationary distribution by power iteration of the lazy chain (I + M)/2
 * from the uniform vector. The lazy chain shares the stationary vectors of M
 * and is aperiodic, so periodic chains converge as well. When `strict` is
 * false a non-converged run warns and returns the last iterate.
 */
inline StationaryDistribution stationary(const Generator &gen, double tol = 1e-10, std::size_t maxIter = 100000,
                                         bool strict = true) {
    const Eigen::Index n = gen.size();
    if (n == 0)
        throw NumericalError("stationary distribution of an empty process");
    StationaryDistribution st;
    st.pi = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
    for (std::size_t it = 1; it <= maxIter; ++it) {
        Eigen::RowVectorXd next = gen.leftMultiply(st.pi);
        st.residual = (next - st.pi).lpNorm<1>();
        st.iterations = it;
        if (st.residual <= tol)
            return st;
        st.pi = 0.5 * (st.pi + next);
        st.pi /= st.pi.sum();
    }
    if (!strict) {
        warn("stationary distribution not converged (residual " + formatDouble(st.residual) + ")");
        return st;
    }
    throw NumericalError("stationary distribution did not converge within " + std::to_string(maxIter) +
                         " iterations (residual " + formatDouble(st.residual) + ")");
}

/**
 * Stationarity time: smallest n >= 1 with max_j |(u M^n)_j - pi_j| <= tol for
 * the uniform start u.
 */
inline double estimateTs(const Generator &gen, const StationaryDistribution &st, double tol = 1e-8,
                         std::size_t maxIter = 100000) {
    const Eigen::Index n = gen.size();
    Eigen::RowVectorXd u = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
    double gap = 0.0;
    for (std::size_t k = 1; k <= maxIter; ++k) {
        u = gen.leftMultiply(u);
        gap = (u - st.pi).cwiseAbs().maxCoeff();
        if (gap <= tol)
            return static_cast<double>(k);
    }
    throw NumericalError("walk did not reach stationarity within " + std::to_string(maxIter) +
                         " steps (gap " + formatDouble(gap) + "); the chain may be periodic or reducible");
}

struct TransitionOptions {
    /// Largest process solved by dense scaling and squaring.
    Eigen::Index denseCap = 2000;
    /// Largest process for which exact transitions are available at all.
    Eigen::Index hardCap = 20000;
};

namespace detail {

// Rows `rows` of exp(-t(I - M)) by uniformization:
// e^{-t} sum_k t^k/k! e_i M^k, truncated once the Poisson tail is < 1e-15.
inline Eigen::MatrixXd transitionRowsSeries(const Generator &gen, double t, const std::vector<Eigen::Index> &rows) {
    const Eigen::Index n = gen.size();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), n);
    const std::size_t kmax = static_cast<std::size_t>(t + 12.0 * std::sqrt(t + 1.0) + 40.0);
    std::vector<double> w(kmax + 1);
    for (std::size_t k = 0; k <= kmax; ++k)
        w[k] = std::exp(-t + (k == 0 ? 0.0 : static_cast<double>(k) * std::log(t)) - std::lgamma(k + 1.0));
    if (t == 0.0)
        std::fill(w.begin() + 1, w.end(), 0.0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(n);
        v[rows[r]] = 1.0;
        double mass = 0.0;
        for (std::size_t k = 0; k <= kmax; ++k) {
            out.row(static_cast<Eigen::Index>(r)) += w[k] * v;
            mass += w[k];
            if (k > t && 1.0 - mass < 1e-15)
                break;
            v = gen.leftMultiply(v);
        }
    }
    return out;
}

} // namespace detail

/// Continuous-time transition matrix exp(-t (I - M)).
inline Eigen::MatrixXd transitionExact(const Generator &gen, double t, const TransitionOptions &opt = {}) {
    if (!(t >= 0.0))
        throw ConfigError("Markov time must be non-negative");
    const Eigen::Index n = gen.size();
    if (n > opt.hardCap)
        throw ConfigError("process of size " + std::to_string(n) +
                          " exceeds the exact-transition cap; use the linearized mode");
    if (n <= opt.denseCap) {
        Eigen::MatrixXd q = gen.toDense();
        q.diagonal().array() -= 1.0;
        return Eigen::MatrixXd((t * q).exp());
    }
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        rows[static_cast<std::size_t>(i)] = i;
    return detail::transitionRowsSeries(gen, t, rows);
}

/**
 * Piecewise-linear surrogate of the transition matrix:
 *   (1-t) I + t M                               on [0, 1]
 *   [(t - ts) M + (1 - t) W] / (1 - ts)          on [1, ts]
 *   W                                           for t >= ts
 * with W = 1 pi the limiting matrix.
 */
inline Eigen::MatrixXd transitionLinearized(const Generator &gen, const StationaryDistribution &st, double t,
                                            double ts) {
    if (!(t >= 0.0))
        throw ConfigError("Markov time must be non-negative");
    if (!(ts >= 1.0))
        throw ConfigError("stationarity time must be at least 1");
    const Eigen::Index n = gen.size();
    Eigen::MatrixXd w = Eigen::VectorXd::Ones(n) * st.pi;
    if (t >= ts)
        return w;
    Eigen::MatrixXd m = gen.toDense();
    if (t <= 1.0) {
        Eigen::MatrixXd out = t * m;
        out.diagonal().array() += 1.0 - t;
        return out;
    }
    return ((t - ts) * m + (1.0 - t) * w) / (1.0 - ts);
}

enum class CovarianceMode { Exact, Linearized };

inline const char *toString(CovarianceMode m) { return m == CovarianceMode::Exact ? "exact" : "linearized"; }

/// What to do when p(t) has a zero entry in the exact covariance.
enum class UnreachablePolicy { Throw, Clamp };

struct CovarianceMatrix {
    SymmetricMatrix S;
    double markovTime = 0.0;
    CovarianceMode mode = CovarianceMode::Exact;

    Eigen::Index size() const noexcept { return S.size(); }
};

/**
 * Exact covariance
 *
 *     S(t) = P(0) T(t) P(t)^{-1} T(t)^T P(0) - p0^T p0,
 *
 * with P(0) = diag(p0), p(t) = p0 T(t), P(t) = diag(p(t)) and
 * T(t) = exp(-t(I - M)). The result is symmetrized.
 */
inline CovarianceMatrix covarianceExact(const Generator &gen, const Eigen::RowVectorXd &p0, double t,
                                        UnreachablePolicy policy = UnreachablePolicy::Throw,
                                        const TransitionOptions &opt = {}) {
    const Eigen::Index n = gen.size();
    if (p0.size() != n)
        throw ConfigError("initial distribution has the wrong length");
    if (std::abs(p0.sum() - 1.0) > 1e-9 || p0.minCoeff() < 0.0)
        throw ConfigError("initial distribution must be a probability vector");
    Eigen::MatrixXd T = transitionExact(gen, t, opt);
    Eigen::RowVectorXd pt = p0 * T;
    Eigen::VectorXd inv(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        if (pt[j] <= 0.0) {
            if (policy == UnreachablePolicy::Throw)
                throw NumericalError("unreachable node at time " + formatDouble(t));
            warn("p(t) entry " + std::to_string(j) + " is zero at t=" + formatDouble(t) + "; clamped to 1e-300");
            inv[j] = 1e300;
        } else {
            inv[j] = 1.0 / pt[j];
        }
    }
    // A = P(0) T, S = A diag(1/p(t)) A^T - p0^T p0
    Eigen::MatrixXd a = p0.transpose().asDiagonal() * T;
    Eigen::MatrixXd scaled = a * inv.asDiagonal();
    Eigen::MatrixXd s = scaled * a.transpose();
    s.noalias() -= p0.transpose() * p0;
    Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
    return CovarianceMatrix{SymmetricMatrix::fromDense(std::move(sym)), t, CovarianceMode::Exact};
}

/**
 * First-order covariance around the stationary state,
 *
 *     S(t) ~ (1 - 2t) Pi + t (Pi M + M^T Pi) - pi^T pi,   0 <= t <= 1,
 *
 * kept as sparse + low-rank: the teleport part of M contributes
 * t[(pi o a) b^T + b (pi o a)^T] and the baseline -pi^T pi.
 */
inline CovarianceMatrix covarianceLinearized(const Generator &gen, const StationaryDistribution &st, double t) {
    if (!(t >= 0.0 && t <= 1.0))
        throw ConfigError("linearized covariance needs 0 <= t <= 1, got " + formatDouble(t));
    const Eigen::Index n = gen.size();
    if (st.pi.size() != n)
        throw ConfigError("stationary distribution has the wrong length");
    const Eigen::VectorXd pi = st.pi.transpose();

    Eigen::SparseMatrix<double> piW = pi.asDiagonal() * Eigen::SparseMatrix<double>(gen.walk);
    Eigen::SparseMatrix<double> sym = Eigen::SparseMatrix<double>(piW.transpose()) + piW;
    sym *= t;
    Eigen::SparseMatrix<double> diag(n, n);
    diag.reserve(Eigen::VectorXi::Constant(n, 1));
    for (Eigen::Index i = 0; i < n; ++i)
        diag.insert(i, i) = (1.0 - 2.0 * t) * pi[i];
    Eigen::SparseMatrix<double> s = sym + diag;

    std::vector<LowRankPair> low;
    if (gen.hasTeleport())
        low.push_back(LowRankPair{pi.cwiseProduct(gen.teleportProb), gen.teleportTarget, t});
    low.push_back(LowRankPair{pi, pi, -0.5});
    return CovarianceMatrix{SymmetricMatrix::fromSparse(std::move(s), std::move(low)), t,
                            CovarianceMode::Linearized};
}

/// Coordinate dump `row col value`, sorted, 17 significant digits, zeros
/// omitted.
inline void dumpCoordinates(std::ostream &out, const Eigen::MatrixXd &m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (m(i, j) != 0.0)
                out << i << ' ' << j << ' ' << formatDouble(m(i, j)) << '\n';
}

} // namespace flowstab

#endif // FLOWSTAB_DIFFUSION_HPP_
