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

#ifndef FLOWSTAB_SYMMETRIC_MATRIX_HPP_
#define FLOWSTAB_SYMMETRIC_MATRIX_HPP_

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace flowstab {

/// scale * (u v^T + v u^T)
struct LowRankPair {
    Eigen::VectorXd u;
    Eigen::VectorXd v;
    double scale = 1.0;

    double entry(Eigen::Index i, Eigen::Index j) const { return scale * (u[i] * v[j] + v[i] * u[j]); }
};

/**
 * Symmetric real matrix stored either densely, or as a sparse symmetric
 * matrix (both triangles stored) plus a short list of symmetric rank-two
 * corrections. The low-rank form lets covariance matrices of processes with
 * teleportation stay sparse at scale.
 */
class SymmetricMatrix {
public:
    SymmetricMatrix() = default;

    static SymmetricMatrix fromDense(Eigen::MatrixXd m) {
        SymmetricMatrix s;
        s.n_ = m.rows();
        s.dense_ = std::move(m);
        s.isDense_ = true;
        return s;
    }

    static SymmetricMatrix fromSparse(Eigen::SparseMatrix<double> m, std::vector<LowRankPair> lowRank = {}) {
        SymmetricMatrix s;
        s.n_ = m.rows();
        m.makeCompressed();
        s.sparse_ = std::move(m);
        s.lowRank_ = std::move(lowRank);
        s.isDense_ = false;
        return s;
    }

    Eigen::Index size() const noexcept { return n_; }
    bool isDense() const noexcept { return isDense_; }
    const Eigen::MatrixXd &dense() const { return dense_; }
    const Eigen::SparseMatrix<double> &sparse() const { return sparse_; }
    const std::vector<LowRankPair> &lowRank() const { return lowRank_; }

    /// Materialize. Only meant for small matrices and tests.
    Eigen::MatrixXd toDense() const {
        if (isDense_)
            return dense_;
        Eigen::MatrixXd m = Eigen::MatrixXd(sparse_);
        for (const LowRankPair &p : lowRank_)
            for (Eigen::Index j = 0; j < n_; ++j)
                for (Eigen::Index i = 0; i < n_; ++i)
                    m(i, j) += p.entry(i, j);
        return m;
    }

    Eigen::VectorXd rowSums() const {
        if (isDense_)
            return dense_.rowwise().sum();
        Eigen::VectorXd ones = Eigen::VectorXd::Ones(n_);
        Eigen::VectorXd r = sparse_ * ones;
        for (const LowRankPair &p : lowRank_)
            r += p.scale * (p.u * p.v.sum() + p.v * p.u.sum());
        return r;
    }

    double trace() const {
        double t = 0.0;
        if (isDense_)
            return dense_.trace();
        for (Eigen::Index i = 0; i < n_; ++i)
            t += sparse_.coeff(i, i);
        for (const LowRankPair &p : lowRank_)
            t += 2.0 * p.scale * p.u.dot(p.v);
        return t;
    }

    /// Largest |S_ij - S_ji|.
    double asymmetry() const {
        if (isDense_)
            return (dense_ - dense_.transpose()).cwiseAbs().maxCoeff();
        Eigen::SparseMatrix<double> d = sparse_ - Eigen::SparseMatrix<double>(sparse_.transpose());
        double worst = 0.0;
        for (Eigen::Index k = 0; k < d.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(d, k); it; ++it)
                worst = std::max(worst, std::abs(it.value()));
        return worst;
    }

    /**
     * Sum of entries inside each diagonal block of `labels` (cluster ids in
     * [0, k)), i.e. the trace of the clustered matrix.
     */
    double clusteredTrace(const std::vector<int> &labels) const {
        int k = 0;
        for (int l : labels)
            k = std::max(k, l + 1);
        double q = 0.0;
        if (isDense_) {
            for (Eigen::Index j = 0; j < n_; ++j)
                for (Eigen::Index i = 0; i < n_; ++i)
                    if (labels[i] == labels[j])
                        q += dense_(i, j);
            return q;
        }
        for (Eigen::Index j = 0; j < sparse_.outerSize(); ++j)
            for (Eigen::SparseMatrix<double>::InnerIterator it(sparse_, j); it; ++it)
                if (labels[it.row()] == labels[j])
                    q += it.value();
        for (const LowRankPair &p : lowRank_) {
            std::vector<double> su(k, 0.0), sv(k, 0.0);
            for (Eigen::Index i = 0; i < n_; ++i) {
                su[labels[i]] += p.u[i];
                sv[labels[i]] += p.v[i];
            }
            for (int c = 0; c < k; ++c)
                q += 2.0 * p.scale * su[c] * sv[c];
        }
        return q;
    }

private:
    Eigen::Index n_ = 0;
    bool isDense_ = true;
    Eigen::MatrixXd dense_;
    Eigen::SparseMatrix<double> sparse_;
    std::vector<LowRankPair> lowRank_;
};

} // namespace flowstab

#endif // FLOWSTAB_SYMMETRIC_MATRIX_HPP_
