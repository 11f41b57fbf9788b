#pragma once

#include "finsler/norms.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace finsler {

/// Finsler metric on a coordinate chart: a Minkowski norm F(x, v) per point.
/// Derivative defaults are centered finite differences; analytic charts
/// override what they can.
class FinslerChart {
public:
    virtual ~FinslerChart() = default;

    virtual int dim() const = 0;
    virtual double value(const Vec& x, const Vec& v) const = 0;

    /// Frozen Minkowski norm at x (for densities and calibration checks).
    virtual NormPtr norm_at(const Vec& x) const = 0;

    /// True while x stays inside the chart's domain of validity.
    virtual bool in_domain(const Vec& x) const { return true; }

    double energy(const Vec& x, const Vec& v) const {
        double f = value(x, v);
        return 0.5 * f * f;
    }

    /// dE/dv; equals the Legendre transform L1(x, v).
    virtual Vec energy_grad_v(const Vec& x, const Vec& v) const {
        return fd_gradient([&](const Vec& w) { return energy(x, w); }, v);
    }

    /// dE/dx at fixed v.
    virtual Vec energy_grad_x(const Vec& x, const Vec& v) const {
        return fd_gradient([&](const Vec& y) { return energy(y, v); }, x);
    }

    /// Fundamental tensor g_ij(x, v) = d^2 E / dv_i dv_j.
    virtual Mat fundamental_tensor(const Vec& x, const Vec& v) const {
        return fd_jacobian([&](const Vec& w) { return energy_grad_v(x, w); }, v, true);
    }

    /// J_ij = d/dx_j (dE/dv_i), the mixed second derivative.
    virtual Mat energy_gradv_jac_x(const Vec& x, const Vec& v) const {
        return fd_jacobian([&](const Vec& y) { return energy_grad_v(y, v); }, x, false);
    }

protected:
    static Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& z) {
        const double h = std::cbrt(std::numeric_limits<double>::epsilon()) *
                         std::max(1.0, z.norm());
        Vec g(z.size());
        for (int i = 0; i < z.size(); ++i) {
            Vec zp = z, zm = z;
            zp[i] += h;
            zm[i] -= h;
            g[i] = (f(zp) - f(zm)) / (2.0 * h);
        }
        return g;
    }

    static Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& z,
                           bool symmetrize) {
        const double h = std::sqrt(std::cbrt(std::numeric_limits<double>::epsilon())) * 1e-2 *
                         std::max(1.0, z.norm());
        const int m = static_cast<int>(z.size());
        Mat j(m, m);
        for (int i = 0; i < m; ++i) {
            Vec zp = z, zm = z;
            zp[i] += h;
            zm[i] -= h;
            j.col(i) = (f(zp) - f(zm)) / (2.0 * h);
        }
        if (symmetrize) j = 0.5 * (j + j.transpose());
        return j;
    }
};

using ChartPtr = std::shared_ptr<const FinslerChart>;

/// Riemannian chart g(x), F = sqrt(v^T g(x) v).
class RiemannianChart : public FinslerChart {
public:
    RiemannianChart(int n, std::function<Mat(const Vec&)> metric,
                    std::function<bool(const Vec&)> domain = nullptr)
        : n_(n), metric_(std::move(metric)), domain_(std::move(domain)) {}

    static std::shared_ptr<RiemannianChart> euclidean(int n) {
        return std::make_shared<RiemannianChart>(
            n, [n](const Vec&) { return Mat(Mat::Identity(n, n)); });
    }

    /// Round sphere of radius 1 in the stereographic chart,
    /// g = 4 (1 + |x|^2)^{-2} I.
    static std::shared_ptr<RiemannianChart> stereographic_sphere(int n) {
        return std::make_shared<RiemannianChart>(n, [n](const Vec& x) {
            double lam = 2.0 / (1.0 + x.squaredNorm());
            return Mat(lam * lam * Mat::Identity(n, n));
        });
    }

    int dim() const override { return n_; }
    double value(const Vec& x, const Vec& v) const override {
        return std::sqrt(std::max(0.0, v.dot(metric_(x) * v)));
    }
    NormPtr norm_at(const Vec& x) const override {
        return std::make_shared<EuclideanNorm>(metric_(x));
    }
    bool in_domain(const Vec& x) const override { return domain_ ? domain_(x) : true; }

    Vec energy_grad_v(const Vec& x, const Vec& v) const override { return metric_(x) * v; }
    Mat fundamental_tensor(const Vec& x, const Vec&) const override { return metric_(x); }

private:
    int n_;
    std::function<Mat(const Vec&)> metric_;
    std::function<bool(const Vec&)> domain_;
};

/// Randers chart F = sqrt(v^T A(x) v) + b(x).v with pointwise closed forms.
class RandersChart : public FinslerChart {
public:
    RandersChart(int n, std::function<Mat(const Vec&)> a, std::function<Vec(const Vec&)> b)
        : n_(n), a_(std::move(a)), b_(std::move(b)) {}

    int dim() const override { return n_; }
    double value(const Vec& x, const Vec& v) const override { return norm_cache(x).value(v); }
    NormPtr norm_at(const Vec& x) const override {
        return std::make_shared<RandersNorm>(a_(x), b_(x));
    }
    Vec energy_grad_v(const Vec& x, const Vec& v) const override {
        return norm_cache(x).energy_gradient(v);
    }
    Mat fundamental_tensor(const Vec& x, const Vec& v) const override {
        return norm_cache(x).fundamental_tensor(v);
    }

private:
    RandersNorm norm_cache(const Vec& x) const { return RandersNorm(a_(x), b_(x)); }

    int n_;
    std::function<Mat(const Vec&)> a_;
    std::function<Vec(const Vec&)> b_;
};

/// Chart whose norm is the same at every point (flat Finsler space).
class ConstantChart : public FinslerChart {
public:
    explicit ConstantChart(NormPtr norm, int n) : n_(n), norm_(std::move(norm)) {}

    int dim() const override { return n_; }
    double value(const Vec&, const Vec& v) const override { return norm_->value(v); }
    NormPtr norm_at(const Vec&) const override { return norm_; }
    Vec energy_grad_v(const Vec&, const Vec& v) const override {
        return norm_->energy_gradient(v);
    }
    Vec energy_grad_x(const Vec& x, const Vec&) const override { return Vec::Zero(x.size()); }
    Mat fundamental_tensor(const Vec&, const Vec& v) const override {
        return norm_->fundamental_tensor(v);
    }
    Mat energy_gradv_jac_x(const Vec& x, const Vec&) const override {
        return Mat::Zero(x.size(), x.size());
    }

private:
    int n_;
    NormPtr norm_;
};

struct GeodesicOptions {
    double step = 1e-3;
    bool renormalize = true;       // rescale v so F(x, v) = 1 after every step
    double condition_limit = 1e12; // abort if g(x, v) is this ill-conditioned
};

struct Geodesic {
    std::vector<double> t;
    std::vector<Vec> x;
    std::vector<Vec> v;
    bool left_domain = false;
    bool aborted = false;

    Vec position(double s) const { return sample(x, s); }
    Vec velocity(double s) const { return sample(v, s); }

private:
    Vec sample(const std::vector<Vec>& data, double s) const {
        require(!t.empty(), "Geodesic: empty");
        if (s <= t.front()) return data.front();
        if (s >= t.back()) return data.back();
        auto it = std::upper_bound(t.begin(), t.end(), s);
        std::size_t i = static_cast<std::size_t>(it - t.begin());
        double w = (s - t[i - 1]) / (t[i] - t[i - 1]);
        return (1.0 - w) * data[i - 1] + w * data[i];
    }
};

namespace detail {

/// Geodesic spray: v' = g^{-1} (dE/dx - J v) with J = d(dE/dv)/dx.
inline Vec geodesic_acceleration(const FinslerChart& chart, const Vec& x, const Vec& v,
                                 bool& bad, double condition_limit) {
    Mat g = chart.fundamental_tensor(x, v);
    Eigen::LDLT<Mat> solver(g);
    if (solver.info() != Eigen::Success) {
        bad = true;
        return Vec::Zero(x.size());
    }
    Vec rhs = chart.energy_grad_x(x, v) - chart.energy_gradv_jac_x(x, v) * v;
    Vec a = solver.solve(rhs);
    if (!a.allFinite() || a.norm() > condition_limit) {
        bad = true;
        return Vec::Zero(x.size());
    }
    return a;
}

}  // namespace detail

/// Integrate the geodesic equation from (x0, v0) for parameter length `length`
/// by classical RK4 with unit-speed renormalization.
inline Geodesic shoot_geodesic(const FinslerChart& chart, Vec x0, Vec v0, double length,
                               const GeodesicOptions& opt = {}) {
    require(length > 0.0 && opt.step > 0.0, "shoot_geodesic: need positive length and step");
    Geodesic out;
    Vec x = std::move(x0);
    Vec v = std::move(v0);
    if (opt.renormalize) v /= chart.value(x, v);
    double t = 0.0;
    out.t.push_back(t);
    out.x.push_back(x);
    out.v.push_back(v);

    const int steps = static_cast<int>(std::ceil(length / opt.step));
    const double h = length / steps;
    for (int s = 0; s < steps; ++s) {
        bool bad = false;
        auto accel = [&](const Vec& xx, const Vec& vv) {
            return detail::geodesic_acceleration(chart, xx, vv, bad, opt.condition_limit);
        };
        Vec k1x = v, k1v = accel(x, v);
        Vec k2x = v + 0.5 * h * k1v, k2v = accel(x + 0.5 * h * k1x, v + 0.5 * h * k1v);
        Vec k3x = v + 0.5 * h * k2v, k3v = accel(x + 0.5 * h * k2x, v + 0.5 * h * k2v);
        Vec k4x = v + h * k3v, k4v = accel(x + h * k3x, v + h * k3v);
        if (bad) {
            out.aborted = true;
            break;
        }
        x += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if (opt.renormalize) v /= chart.value(x, v);
        t += h;
        out.t.push_back(t);
        out.x.push_back(x);
        out.v.push_back(v);
        if (!chart.in_domain(x)) {
            out.left_domain = true;
            break;
        }
    }
    return out;
}

/// Euler-Lagrange residual r(t) = d/dt (dE/dv) - dE/dx along a sampled curve;
/// zero exactly on geodesics. `i` indexes interior samples.
inline double euler_lagrange_residual(const FinslerChart& chart, const Geodesic& geo) {
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < geo.t.size(); ++i) {
        double dt = geo.t[i + 1] - geo.t[i - 1];
        Vec dp = (chart.energy_grad_v(geo.x[i + 1], geo.v[i + 1]) -
                  chart.energy_grad_v(geo.x[i - 1], geo.v[i - 1])) /
                 dt;
        Vec r = dp - chart.energy_grad_x(geo.x[i], geo.v[i]);
        worst = std::max(worst, r.norm());
    }
    return worst;
}

/// Finsler length of a parametrized curve c(t) (composite trapezoid).
inline double curve_length(const FinslerChart& chart, const std::function<Vec(double)>& c,
                           double t0, double t1, int samples = 2048) {
    const double h = (t1 - t0) / samples;
    const double dh = 1e-6 * std::max(1.0, std::abs(t1 - t0));
    auto speed = [&](double t) {
        // Keep the difference stencil inside [t0, t1].
        double a = std::max(t0, t - dh);
        double b = std::min(t1, t + dh);
        Vec dx = (c(b) - c(a)) / (b - a);
        return chart.value(c(t), dx);
    };
    double total = 0.5 * (speed(t0) + speed(t1));
    for (int i = 1; i < samples; ++i) total += speed(t0 + i * h);
    return total * h;
}

/// Hilbert 1-form on the slit tangent bundle, omega1|_(x,v) (X, V) =
/// <dE/dv(x, v), X> -- the 1-homogeneous extension off the unit sphere bundle.
struct TangentBundlePoint {
    Vec x;
    Vec v;
};

inline double hilbert_one_form(const FinslerChart& chart, const TangentBundlePoint& p,
                               const Vec& dx, const Vec& /*dv*/) {
    return chart.energy_grad_v(p.x, p.v).dot(dx) / chart.value(p.x, p.v);
}

/// d(omega1) at p evaluated on two constant-extension tangent vectors
/// (dx_i, dv_i) of TM, by centered finite differences:
/// d(omega)(X, Y) = X omega(Y) - Y omega(X) for constant X, Y.
inline double d_hilbert_one_form(const FinslerChart& chart, const TangentBundlePoint& p,
                                 const Vec& dx1, const Vec& dv1, const Vec& dx2,
                                 const Vec& dv2, double h = 1e-5) {
    auto omega = [&](const TangentBundlePoint& q, const Vec& dx, const Vec& dv) {
        return hilbert_one_form(chart, q, dx, dv);
    };
    auto shift = [&](double s, const Vec& dx, const Vec& dv) {
        return TangentBundlePoint{p.x + s * dx, p.v + s * dv};
    };
    double x_of_y = (omega(shift(h, dx1, dv1), dx2, dv2) -
                     omega(shift(-h, dx1, dv1), dx2, dv2)) /
                    (2.0 * h);
    double y_of_x = (omega(shift(h, dx2, dv2), dx1, dv1) -
                     omega(shift(-h, dx2, dv2), dx1, dv1)) /
                    (2.0 * h);
    return x_of_y - y_of_x;
}

}  // namespace finsler
