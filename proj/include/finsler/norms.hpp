#pragma once

#include "finsler/common.hpp"
#include "finsler/exterior.hpp"

#include <limits>
#include <memory>

namespace finsler {

class MinkowskiNorm;
using NormPtr = std::shared_ptr<const MinkowskiNorm>;

/// Smooth quadratically convex norm on R^n with derivative access.
/// All values are immutable after construction; evaluation is pure.
class MinkowskiNorm {
public:
    explicit MinkowskiNorm(int n) : n_(n) { require(n >= 1, "norm: dimension >= 1"); }
    virtual ~MinkowskiNorm() = default;

    int dim() const { return n_; }

    /// F(v) >= 0, positively homogeneous of degree 1.
    virtual double value(const Vec& v) const = 0;

    /// dF_v. Default: central finite differences, step ~ eps^{1/3} * max(1,|v|).
    virtual Vec gradient(const Vec& v) const {
        const double h = fd_step(v);
        Vec g(n_);
        Vec e = v;
        for (int i = 0; i < n_; ++i) {
            e[i] = v[i] + h;
            double fp = value(e);
            e[i] = v[i] - h;
            double fm = value(e);
            e[i] = v[i];
            g[i] = (fp - fm) / (2.0 * h);
        }
        return g;
    }

    /// Fundamental tensor g_v = Hess(F^2/2). Default: finite differences of the
    /// energy gradient, symmetrized.
    virtual Mat fundamental_tensor(const Vec& v) const {
        const double h = fd_step(v);
        Mat g(n_, n_);
        Vec e = v;
        for (int i = 0; i < n_; ++i) {
            e[i] = v[i] + h;
            Vec gp = energy_gradient(e);
            e[i] = v[i] - h;
            Vec gm = energy_gradient(e);
            e[i] = v[i];
            g.col(i) = (gp - gm) / (2.0 * h);
        }
        return 0.5 * (g + g.transpose());
    }

    /// Legendre map of the norm, L1(v) = (1/2) d(F^2)_v = F(v) dF_v.
    Vec energy_gradient(const Vec& v) const { return value(v) * gradient(v); }

    /// Dual norm F*(p) = sup { p(v) : F(v) = 1 }. Default: maximization of
    /// p(u)/F(u) over the Euclidean unit sphere (multi-start, golden-section
    /// refinement); closed forms in the concrete families override this.
    virtual double dual(const Vec& p) const;

    /// Restriction to the k-plane spanned by the orthonormal columns of Q:
    /// w in R^k maps to F(Q w). Families with a closed form override this;
    /// the default defers to the generic wrapper in restricted_of().
    virtual NormPtr restricted(const Mat&) const { return nullptr; }

protected:
    double fd_step(const Vec& v) const {
        const double eps = std::numeric_limits<double>::epsilon();
        return std::cbrt(eps) * std::max(1.0, v.norm());
    }

private:
    int n_;
};

namespace detail {

/// Generic restriction wrapper w -> F(Q w).
class RestrictedNorm final : public MinkowskiNorm {
public:
    RestrictedNorm(NormPtr parent, Mat basis)
        : MinkowskiNorm(static_cast<int>(basis.cols())),
          parent_(std::move(parent)),
          basis_(std::move(basis)) {}

    double value(const Vec& w) const override { return parent_->value(basis_ * w); }
    Vec gradient(const Vec& w) const override {
        return basis_.transpose() * parent_->gradient(basis_ * w);
    }
    Mat fundamental_tensor(const Vec& w) const override {
        return basis_.transpose() * parent_->fundamental_tensor(basis_ * w) * basis_;
    }

private:
    NormPtr parent_;
    Mat basis_;
};

inline double dual_on_circle(const MinkowskiNorm& norm, const Vec& p) {
    auto ratio = [&](double th) {
        Vec u(2);
        u << std::cos(th), std::sin(th);
        return p.dot(u) / norm.value(u);
    };
    const int coarse = 256;
    double best = -std::numeric_limits<double>::infinity();
    double best_th = 0.0;
    for (int i = 0; i < coarse; ++i) {
        double th = 2.0 * kPi * i / coarse;
        double r = ratio(th);
        if (r > best) {
            best = r;
            best_th = th;
        }
    }
    double span = 2.0 * kPi / coarse;
    return golden_maximize(ratio, best_th - span, best_th + span, 1e-13);
}

inline double dual_by_sphere_search(const MinkowskiNorm& norm, const Vec& p) {
    const int n = norm.dim();
    auto ratio = [&](const Vec& u) { return p.dot(u) / norm.value(u); };
    // Multi-start projected pattern search.
    std::vector<Vec> starts;
    starts.push_back(p.normalized());
    for (int i = 0; i < n; ++i) {
        Vec e = Vec::Zero(n);
        e[i] = 1.0;
        starts.push_back(e);
        starts.push_back(-e);
    }
    double best_total = -std::numeric_limits<double>::infinity();
    for (const Vec& s : starts) {
        Vec u = s;
        double step = 0.5;
        double fu = ratio(u);
        while (step > 1e-13) {
            bool improved = false;
            for (int i = 0; i < n; ++i) {
                for (double sgn : {1.0, -1.0}) {
                    Vec cand = u;
                    cand[i] += sgn * step;
                    cand.normalize();
                    double fc = ratio(cand);
                    if (fc > fu) {
                        u = cand;
                        fu = fc;
                        improved = true;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
        best_total = std::max(best_total, fu);
    }
    return best_total;
}

}  // namespace detail

inline double MinkowskiNorm::dual(const Vec& p) const {
    require(p.size() == dim(), "dual: dimension mismatch");
    if (p.norm() == 0.0) return 0.0;
    if (dim() == 1) {
        Vec e(1);
        e << 1.0;
        double up = p[0] / value(e);
        e << -1.0;
        double um = -p[0] / value(e);
        return std::max(up, um);
    }
    if (dim() == 2) return detail::dual_on_circle(*this, p);
    return detail::dual_by_sphere_search(*this, p);
}

/// Restriction of a norm to span(basis columns); keeps the parent alive when
/// the generic wrapper is needed.
inline NormPtr restricted_of(NormPtr norm, const Mat& basis) {
    require(basis.rows() == norm->dim(), "restricted_of: basis rows must match dimension");
    if (NormPtr closed = norm->restricted(basis)) return closed;
    return std::make_shared<detail::RestrictedNorm>(std::move(norm), basis);
}

/// Euclidean norm F(v) = sqrt(v^T A v), A symmetric positive definite.
class EuclideanNorm final : public MinkowskiNorm {
public:
    explicit EuclideanNorm(Mat a) : MinkowskiNorm(static_cast<int>(a.rows())), a_(std::move(a)) {
        require(a_.rows() == a_.cols(), "EuclideanNorm: A must be square");
        Eigen::LLT<Mat> llt(a_);
        require(llt.info() == Eigen::Success, "EuclideanNorm: A must be SPD");
        a_inv_ = llt.solve(Mat::Identity(dim(), dim()));
    }

    static NormPtr standard(int n) { return std::make_shared<EuclideanNorm>(Mat::Identity(n, n)); }

    const Mat& quadratic_form() const { return a_; }

    double value(const Vec& v) const override { return std::sqrt(v.dot(a_ * v)); }
    Vec gradient(const Vec& v) const override {
        double f = value(v);
        require(f > 0.0, "gradient: v must be nonzero");
        return a_ * v / f;
    }
    Mat fundamental_tensor(const Vec&) const override { return a_; }
    double dual(const Vec& p) const override { return std::sqrt(p.dot(a_inv_ * p)); }
    NormPtr restricted(const Mat& basis) const override {
        return std::make_shared<EuclideanNorm>(basis.transpose() * a_ * basis);
    }

private:
    Mat a_;
    Mat a_inv_;
};

/// Randers norm F(v) = sqrt(v^T A v) + <b, v> with ||b||_{A^-1} < 1.
class RandersNorm final : public MinkowskiNorm {
public:
    RandersNorm(Mat a, Vec b)
        : MinkowskiNorm(static_cast<int>(a.rows())), a_(std::move(a)), b_(std::move(b)) {
        require(a_.rows() == a_.cols() && b_.size() == a_.rows(), "RandersNorm: shape mismatch");
        Eigen::LLT<Mat> llt(a_);
        require(llt.info() == Eigen::Success, "RandersNorm: A must be SPD");
        double drift = b_.dot(llt.solve(b_));
        require(drift < 1.0, "RandersNorm: need ||b||_{A^-1} < 1");
        // Unit ball is the ellipsoid { v : v^T G v + 2 b.v <= 1 }, G = A - b b^T.
        g_ = a_ - b_ * b_.transpose();
        Eigen::LLT<Mat> lltg(g_);
        Vec ginv_b = lltg.solve(b_);
        dual_drift_ = -ginv_b;                      // center of the unit ball
        double s = 1.0 + b_.dot(ginv_b);
        dual_quadratic_ = lltg.solve(Mat::Identity(dim(), dim())) * s;  // M^{-1}, M = G/s
    }

    const Mat& quadratic_form() const { return a_; }
    const Vec& drift() const { return b_; }

    double value(const Vec& v) const override { return std::sqrt(v.dot(a_ * v)) + b_.dot(v); }

    Vec gradient(const Vec& v) const override {
        double alpha = std::sqrt(v.dot(a_ * v));
        require(alpha > 0.0, "gradient: v must be nonzero");
        return a_ * v / alpha + b_;
    }

    Mat fundamental_tensor(const Vec& v) const override {
        double alpha = std::sqrt(v.dot(a_ * v));
        require(alpha > 0.0, "fundamental_tensor: v must be nonzero");
        Vec av = a_ * v;
        Vec df = av / alpha + b_;
        double f = alpha + b_.dot(v);
        Mat hess_f = a_ / alpha - av * av.transpose() / (alpha * alpha * alpha);
        return df * df.transpose() + f * hess_f;
    }

    /// Support function of the unit ball: F*(p) = <c, p> + sqrt(p^T M^{-1} p)
    /// with (c, M) the center and shape of the ellipsoidal unit ball.
    double dual(const Vec& p) const override {
        return dual_drift_.dot(p) + std::sqrt(p.dot(dual_quadratic_ * p));
    }

    NormPtr restricted(const Mat& basis) const override {
        return std::make_shared<RandersNorm>(basis.transpose() * a_ * basis,
                                             basis.transpose() * b_);
    }

private:
    Mat a_;
    Vec b_;
    Mat g_;
    Vec dual_drift_;
    Mat dual_quadratic_;
};

/// Discretized cosine-transform norm F(v) = sum_i c_i |<xi_i, v>| with fixed
/// nodes; the frozen form of a Crofton metric at a point. Exactly a Crofton
/// norm for the discrete hyperplane measure carried by the nodes.
class DiscreteCosineNorm final : public MinkowskiNorm {
public:
    DiscreteCosineNorm(Mat nodes, Vec coeffs)
        : MinkowskiNorm(static_cast<int>(nodes.rows())),
          nodes_(std::move(nodes)),
          coeffs_(std::move(coeffs)) {
        require(nodes_.cols() == coeffs_.size(), "DiscreteCosineNorm: shape mismatch");
        require(coeffs_.minCoeff() > 0.0, "DiscreteCosineNorm: coefficients must be positive");
    }

    const Mat& nodes() const { return nodes_; }
    const Vec& coeffs() const { return coeffs_; }

    double value(const Vec& v) const override {
        return (nodes_.transpose() * v).array().abs().matrix().dot(coeffs_);
    }

    Vec gradient(const Vec& v) const override {
        Vec s = (nodes_.transpose() * v).array().sign().matrix();
        return nodes_ * (s.array() * coeffs_.array()).matrix();
    }

    NormPtr restricted(const Mat& basis) const override {
        return std::make_shared<DiscreteCosineNorm>(basis.transpose() * nodes_, coeffs_);
    }

    /// For dim 2 the dual unit ball is the zonogon sum_i [-c_i xi_i, c_i xi_i];
    /// its area is exact: 4 * sum_{i<j} c_i c_j |xi_i x xi_j|.
    double dual_ball_area() const {
        require(dim() == 2, "dual_ball_area: dimension 2 only");
        const long m = coeffs_.size();
        Vec x = nodes_.row(0).transpose().cwiseProduct(coeffs_);
        Vec y = nodes_.row(1).transpose().cwiseProduct(coeffs_);
        double acc = 0.0;
        for (long i = 0; i < m; ++i) {
            double xi = x[i], yi = y[i];
            for (long j = i + 1; j < m; ++j) acc += std::abs(xi * y[j] - yi * x[j]);
        }
        return 4.0 * acc;
    }

private:
    Mat nodes_;
    Vec coeffs_;
};

struct DualNormResult {
    double value = 0.0;
    bool converged = true;
    double residual = 0.0;
};

/// Reporting wrapper around MinkowskiNorm::dual for callers that need the
/// convergence contract of the spec'd operation.
inline DualNormResult dual_norm(const MinkowskiNorm& norm, const Vec& p) {
    DualNormResult r;
    r.value = norm.dual(p);
    // The closed forms are exact; the search paths terminate at step < 1e-13,
    // report the bracket width as residual.
    r.residual = 1e-12 * std::max(1.0, std::abs(r.value));
    return r;
}

/// Legendre map of the norm, L1(v) = (1/2) d(F^2)_v; rejected at v = 0.
inline Vec legendre_norm(const MinkowskiNorm& norm, const Vec& v) {
    require(v.norm() > 0.0, "legendre_norm: v must be nonzero");
    return norm.energy_gradient(v);
}

}  // namespace finsler
