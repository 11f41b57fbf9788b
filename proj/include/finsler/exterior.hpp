#pragma once

#include "finsler/common.hpp"

namespace finsler {

/// Decomposable k-vector v1 ^ ... ^ vk of R^n kept in factored form, so the
/// spanned oriented k-plane is always recoverable.
class SimpleKVector {
public:
    /// factors: n x k matrix, one factor per column, order fixes orientation.
    explicit SimpleKVector(Mat factors) : factors_(std::move(factors)) {
        require(factors_.cols() >= 1, "SimpleKVector: need k >= 1");
        require(factors_.rows() >= factors_.cols(), "SimpleKVector: need n >= k");
    }

    static SimpleKVector from_indices(int n, const std::vector<int>& idx, double scale = 1.0) {
        Mat f = Mat::Zero(n, static_cast<int>(idx.size()));
        for (int j = 0; j < f.cols(); ++j) f(idx[j], j) = 1.0;
        f.col(0) *= scale;
        return SimpleKVector(f);
    }

    int dim() const { return static_cast<int>(factors_.rows()); }
    int grade() const { return static_cast<int>(factors_.cols()); }
    const Mat& factors() const { return factors_; }

    /// Euclidean magnitude sqrt(det(F^T F)); zero iff the factors are dependent.
    double magnitude() const {
        Mat g = factors_.transpose() * factors_;
        double det = g.determinant();
        return det > 0.0 ? std::sqrt(det) : 0.0;
    }

    SimpleKVector scaled(double t) const {
        Mat f = factors_;
        f.col(0) *= t;
        return SimpleKVector(f);
    }

    /// Components on the lexicographic basis of Lambda^k R^n.
    Vec components() const {
        auto combos = combinations(dim(), grade());
        Vec c(static_cast<long>(combos.size()));
        Mat sub(grade(), grade());
        for (std::size_t ci = 0; ci < combos.size(); ++ci) {
            for (int r = 0; r < grade(); ++r) sub.row(r) = factors_.row(combos[ci][r]);
            c[static_cast<long>(ci)] = sub.determinant();
        }
        return c;
    }

    /// Oriented orthonormal basis of the spanned plane (Gram-Schmidt of the
    /// factors, auxiliary Euclidean structure of the chart coordinates).
    Mat span_basis() const {
        const double tol = 1e-12 * std::max(1.0, factors_.norm());
        Mat q(dim(), grade());
        for (int j = 0; j < grade(); ++j) {
            Vec v = factors_.col(j);
            for (int i = 0; i < j; ++i) v -= q.col(i).dot(factors_.col(j)) * q.col(i);
            double nrm = v.norm();
            require(nrm > tol, "span_basis: factors are linearly dependent");
            q.col(j) = v / nrm;
        }
        return q;
    }

private:
    Mat factors_;
};

/// k-covector stored densely on the lexicographic basis of Lambda^k (R^n)*.
class KCovector {
public:
    KCovector(int n, int k, Vec components)
        : n_(n), k_(k), components_(std::move(components)) {
        require(components_.size() == binomial(n, k), "KCovector: bad component count");
    }

    static KCovector zero(int n, int k) {
        return KCovector(n, k, Vec::Zero(binomial(n, k)));
    }

    /// Wedge of k 1-covectors (one per column).
    static KCovector wedge(const Mat& covectors) {
        const int n = static_cast<int>(covectors.rows());
        const int k = static_cast<int>(covectors.cols());
        auto combos = combinations(n, k);
        Vec c(static_cast<long>(combos.size()));
        Mat sub(k, k);
        for (std::size_t ci = 0; ci < combos.size(); ++ci) {
            for (int r = 0; r < k; ++r) sub.row(r) = covectors.row(combos[ci][r]);
            c[static_cast<long>(ci)] = sub.determinant();
        }
        return KCovector(n, k, c);
    }

    static KCovector basis_element(int n, const std::vector<int>& idx) {
        Mat cov = Mat::Zero(n, static_cast<int>(idx.size()));
        for (int j = 0; j < cov.cols(); ++j) cov(idx[j], j) = 1.0;
        return wedge(cov);
    }

    int dim() const { return n_; }
    int grade() const { return k_; }
    const Vec& components() const { return components_; }

    KCovector operator*(double t) const { return KCovector(n_, k_, components_ * t); }
    KCovector operator+(const KCovector& o) const {
        require(n_ == o.n_ && k_ == o.k_, "KCovector: mismatched shapes");
        return KCovector(n_, k_, components_ + o.components_);
    }
    KCovector operator-(const KCovector& o) const {
        require(n_ == o.n_ && k_ == o.k_, "KCovector: mismatched shapes");
        return KCovector(n_, k_, components_ - o.components_);
    }

private:
    int n_;
    int k_;
    Vec components_;
};

/// Pairing <Lambda^k R^n, Lambda^k (R^n)*>; multilinear and alternating in the
/// factors of `a`.
inline double pair(const KCovector& xi, const SimpleKVector& a) {
    require(xi.dim() == a.dim() && xi.grade() == a.grade(), "pair: dimension mismatch");
    return xi.components().dot(a.components());
}

inline double pair(const KCovector& xi, const Vec& dense_components) {
    require(xi.components().size() == dense_components.size(), "pair: dimension mismatch");
    return xi.components().dot(dense_components);
}

/// For k = n-1 every k-vector is simple; recover a factored representative
/// from dense lexicographic components via the cross-product correspondence
/// z_i = (-1)^{i+n} c_{complement(i)}.
inline SimpleKVector simple_from_components(int n, const Vec& comps) {
    const int k = n - 1;
    require(comps.size() == binomial(n, k), "simple_from_components: bad size");
    auto combos = combinations(n, k);
    Vec z = Vec::Zero(n);
    for (std::size_t ci = 0; ci < combos.size(); ++ci) {
        int missing = -1;
        int pos = 0;
        for (int i = 0; i < n; ++i) {
            if (pos < k && combos[ci][pos] == i) {
                ++pos;
            } else {
                missing = i;
            }
        }
        double sign = ((missing + 1 + n) % 2 == 0) ? 1.0 : -1.0;
        z[missing] = sign * comps[static_cast<long>(ci)];
    }
    double mag = z.norm();
    require(mag > 0.0, "simple_from_components: zero k-vector");
    // Orthonormal basis of z-perp, oriented so det[basis, z] > 0.
    Eigen::FullPivHouseholderQR<Mat> qr(z);
    Mat Q = qr.matrixQ();
    Mat basis(n, k);
    for (int j = 0; j < k; ++j) basis.col(j) = Q.col(j + 1);
    Mat full(n, n);
    full.leftCols(k) = basis;
    full.col(k) = z / mag;
    if (full.determinant() < 0) basis.col(0) *= -1.0;
    basis.col(0) *= mag;
    return SimpleKVector(basis);
}

}  // namespace finsler
