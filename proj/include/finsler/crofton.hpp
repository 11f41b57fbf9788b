#pragma once

#include "finsler/chart.hpp"

namespace finsler {

/// Positive even density m(xi, p) on the space of oriented hyperplanes
/// { x : <xi, x> = p }, xi on the unit sphere. Evenness m(-xi, -p) = m(xi, p)
/// makes the induced metric well defined on unoriented hyperplanes.
class HyperplaneMeasure {
public:
    virtual ~HyperplaneMeasure() = default;
    virtual double density(const Vec& xi, double p) const = 0;
    virtual double density_dp(const Vec& xi, double p) const {
        const double h = 1e-6 * std::max(1.0, std::abs(p));
        return (density(xi, p + h) - density(xi, p - h)) / (2.0 * h);
    }
};

using MeasurePtr = std::shared_ptr<const HyperplaneMeasure>;

class ConstantMeasure : public HyperplaneMeasure {
public:
    explicit ConstantMeasure(double c = 1.0) : c_(c) { require(c > 0.0, "measure must be positive"); }
    double density(const Vec&, double) const override { return c_; }
    double density_dp(const Vec&, double) const override { return 0.0; }

private:
    double c_;
};

/// m(xi, p) = base + amplitude * exp(-p^2): more hyperplanes near the origin.
class GaussianBumpMeasure : public HyperplaneMeasure {
public:
    GaussianBumpMeasure(double base, double amplitude) : base_(base), amp_(amplitude) {
        require(base > 0.0 && base + std::min(0.0, amplitude) > 0.0, "measure must be positive");
    }
    double density(const Vec&, double p) const override {
        return base_ + amp_ * std::exp(-p * p);
    }
    double density_dp(const Vec&, double p) const override {
        return -2.0 * p * amp_ * std::exp(-p * p);
    }

private:
    double base_;
    double amp_;
};

struct CroftonOptions {
    int polar_nodes = 32;    // Gauss-Legendre nodes per hemisphere
    int azimuth_nodes = 64;  // trapezoid nodes (n = 3 only)
    int circle_nodes = 128;  // great-circle trapezoid for the Hessian (n = 3)
};

/// Projective Finsler metric from a hyperplane measure (n in {2, 3}):
///   F(x, v) = (1/2) int_{S^{n-1}} |<xi, v>| m(xi, <xi, x>) dxi.
/// All quadratures are aligned with v so the |.| kink sits at panel ends and
/// the integrands are smooth per panel.
class CroftonChart : public FinslerChart {
public:
    CroftonChart(int n, MeasurePtr measure, const CroftonOptions& opt = {})
        : n_(n), measure_(std::move(measure)), opt_(opt) {
        require(n == 2 || n == 3, "CroftonChart: n must be 2 or 3");
        gl_ = gauss_legendre(opt_.polar_nodes);
    }

    int dim() const override { return n_; }

    double value(const Vec& x, const Vec& v) const override {
        double acc = 0.0;
        sphere_quadrature(v, [&](const Vec& xi, double w) {
            acc += w * std::abs(xi.dot(v)) * measure_->density(xi, xi.dot(x));
        });
        return 0.5 * acc;
    }

    Vec energy_grad_v(const Vec& x, const Vec& v) const override {
        return value(x, v) * grad_v_f(x, v);
    }

    Vec energy_grad_x(const Vec& x, const Vec& v) const override {
        return value(x, v) * grad_x_f(x, v);
    }

    Mat fundamental_tensor(const Vec& x, const Vec& v) const override {
        Vec df = grad_v_f(x, v);
        return df * df.transpose() + value(x, v) * hessian_f(x, v);
    }

    Mat energy_gradv_jac_x(const Vec& x, const Vec& v) const override {
        // d/dx (F dF/dv) = dF/dv (dF/dx)^T + F * (1/2) int sign(<xi,v>) dm/dp xi xi^T.
        Vec df_v = grad_v_f(x, v);
        Vec df_x = grad_x_f(x, v);
        Mat mixed = Mat::Zero(n_, n_);
        sphere_quadrature(v, [&](const Vec& xi, double w) {
            double s = xi.dot(v) >= 0.0 ? 1.0 : -1.0;
            mixed += (w * s * measure_->density_dp(xi, xi.dot(x))) * (xi * xi.transpose());
        });
        return df_v * df_x.transpose() + value(x, v) * (0.5 * mixed);
    }

    NormPtr norm_at(const Vec& x) const override;

    const HyperplaneMeasure& measure() const { return *measure_; }

private:
    /// dF/dv = (1/2) int sign(<xi, v>) xi m dxi.
    Vec grad_v_f(const Vec& x, const Vec& v) const {
        Vec acc = Vec::Zero(n_);
        sphere_quadrature(v, [&](const Vec& xi, double w) {
            double s = xi.dot(v) >= 0.0 ? 1.0 : -1.0;
            acc += (w * s * measure_->density(xi, xi.dot(x))) * xi;
        });
        return 0.5 * acc;
    }

    /// dF/dx = (1/2) int |<xi, v>| dm/dp xi dxi.
    Vec grad_x_f(const Vec& x, const Vec& v) const {
        Vec acc = Vec::Zero(n_);
        sphere_quadrature(v, [&](const Vec& xi, double w) {
            acc += (w * std::abs(xi.dot(v)) * measure_->density_dp(xi, xi.dot(x))) * xi;
        });
        return 0.5 * acc;
    }

    /// Hess_v F = (1/|v|) times the measure-weighted second moment of the
    /// sphere's intersection with v-perp (the distributional derivative of
    /// sign concentrates there).
    Mat hessian_f(const Vec& x, const Vec& v) const {
        const double speed = v.norm();
        require(speed > 0.0, "CroftonChart: v = 0");
        Vec vhat = v / speed;
        Mat acc = Mat::Zero(n_, n_);
        if (n_ == 2) {
            Vec perp(2);
            perp << -vhat[1], vhat[0];
            acc += measure_->density(perp, perp.dot(x)) * (perp * perp.transpose());
            Vec mperp = -perp;
            acc += measure_->density(mperp, mperp.dot(x)) * (mperp * mperp.transpose());
        } else {
            Mat frame = perp_frame(vhat);
            const int m = opt_.circle_nodes;
            for (int i = 0; i < m; ++i) {
                double s = 2.0 * kPi * i / m;
                Vec xi = std::cos(s) * frame.col(0) + std::sin(s) * frame.col(1);
                acc += (2.0 * kPi / m) * measure_->density(xi, xi.dot(x)) *
                       (xi * xi.transpose());
            }
        }
        return acc / speed;
    }

    static Mat perp_frame(const Vec& vhat) {
        Mat frame(3, 2);
        Vec seed = std::abs(vhat[0]) < 0.9 ? Vec(Vec::Unit(3, 0)) : Vec(Vec::Unit(3, 1));
        frame.col(0) = (seed - seed.dot(vhat) * vhat).normalized();
        const Vec a = vhat, b = frame.col(0);
        frame.col(1) << a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0];
        return frame;
    }

    /// Sphere quadrature with the pole at v-hat, split across the equator.
    template <class F>
    void sphere_quadrature(const Vec& v, F&& f) const {
        Vec vhat = v.normalized();
        if (n_ == 2) {
            Vec perp(2);
            perp << -vhat[1], vhat[0];
            // theta measured from v-hat; |cos| is smooth on each half circle.
            for (double shift : {0.0, kPi}) {
                for (int i = 0; i < gl_.nodes.size(); ++i) {
                    double th = shift - 0.5 * kPi + 0.5 * kPi * (gl_.nodes[i] + 1.0);
                    Vec xi = std::cos(th) * vhat + std::sin(th) * perp;
                    f(xi, 0.5 * kPi * gl_.weights[i]);
                }
            }
        } else {
            Mat frame = perp_frame(vhat);
            const int m = opt_.azimuth_nodes;
            // u = cos(polar angle) in [-1, 0] and [0, 1]; area element du dpsi.
            for (double lo : {-1.0, 0.0}) {
                for (int i = 0; i < gl_.nodes.size(); ++i) {
                    double u = lo + 0.5 * (gl_.nodes[i] + 1.0);
                    double r = std::sqrt(std::max(0.0, 1.0 - u * u));
                    double wu = 0.5 * gl_.weights[i];
                    for (int j = 0; j < m; ++j) {
                        double psi = 2.0 * kPi * j / m;
                        Vec xi = u * vhat + r * (std::cos(psi) * frame.col(0) +
                                                 std::sin(psi) * frame.col(1));
                        f(xi, wu * 2.0 * kPi / m);
                    }
                }
            }
        }
    }

    int n_;
    MeasurePtr measure_;
    CroftonOptions opt_;
    Quadrature1D gl_;
};

namespace detail {

/// Frozen Minkowski norm of a Crofton chart at a fixed point.
class CroftonFrozenNorm : public MinkowskiNorm {
public:
    CroftonFrozenNorm(CroftonChart chart, Vec x)
        : MinkowskiNorm(chart.dim()), chart_(std::move(chart)), x_(std::move(x)) {}

    double value(const Vec& v) const override { return chart_.value(x_, v); }
    Vec gradient(const Vec& v) const override {
        return chart_.energy_grad_v(x_, v) / chart_.value(x_, v);
    }
    Mat fundamental_tensor(const Vec& v) const override {
        return chart_.fundamental_tensor(x_, v);
    }

private:
    CroftonChart chart_;
    Vec x_;
};

}  // namespace detail

inline NormPtr CroftonChart::norm_at(const Vec& x) const {
    return std::make_shared<detail::CroftonFrozenNorm>(*this, x);
}

/// Crofton chart with a discrete hyperplane measure: atoms at fixed normals
/// xi_i with smooth positive position-dependent weights c_i(x), so
/// F(x, v) = sum_i c_i(x) |<xi_i, v>|. Exactly a Crofton metric, hence its
/// straight lines are geodesics and its affine k-flats minimize HT volume,
/// but F is only piecewise smooth in v: use it for densities, not for
/// geodesic shooting.
class DiscreteCroftonChart : public FinslerChart {
public:
    DiscreteCroftonChart(Mat normals, std::function<Vec(const Vec&)> coefficients)
        : normals_(std::move(normals)), coefficients_(std::move(coefficients)) {}

    int dim() const override { return static_cast<int>(normals_.rows()); }
    double value(const Vec& x, const Vec& v) const override {
        return (coefficients_(x).array() * (normals_.transpose() * v).array().abs()).sum();
    }
    NormPtr norm_at(const Vec& x) const override {
        return std::make_shared<DiscreteCosineNorm>(normals_, coefficients_(x));
    }

private:
    Mat normals_;
    std::function<Vec(const Vec&)> coefficients_;
};

struct LengthIdentityReport {
    double curve_length = 0.0;   // quadrature of F along the curve
    double mc_estimate = 0.0;    // Monte-Carlo hyperplane-crossing integral
    double mc_std_error = 0.0;
    int samples = 0;
};

/// Monte-Carlo check of the Crofton length formula
///   length(c) = (1/2) int_{S^{n-1}} int_R #(c cap H_{xi,p}) m(xi, p) dp dxi.
/// Hyperplane offsets are sampled uniformly over the curve's projection range
/// per direction; directions uniformly on the sphere.
inline LengthIdentityReport crofton_length_identity_check(
    const CroftonChart& chart, const std::function<Vec(double)>& curve, double t0, double t1,
    int samples, std::uint64_t seed, int curve_samples = 2048) {
    const int n = chart.dim();
    LengthIdentityReport rep;
    rep.samples = samples;
    rep.curve_length = curve_length(chart, curve, t0, t1);

    std::vector<Vec> pts(curve_samples + 1);
    for (int i = 0; i <= curve_samples; ++i)
        pts[static_cast<std::size_t>(i)] = curve(t0 + (t1 - t0) * i / curve_samples);

    const double sphere_area = (n == 2) ? 2.0 * kPi : 4.0 * kPi;
    Rng rng(seed);
    double sum = 0.0, sum2 = 0.0;
    for (int s = 0; s < samples; ++s) {
        Vec xi = rng.unit_vector(n);
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& q : pts) {
            double proj = xi.dot(q);
            lo = std::min(lo, proj);
            hi = std::max(hi, proj);
        }
        double range = hi - lo;
        double sample = 0.0;
        if (range > 0.0) {
            double p = rng.uniform(lo, hi);
            int crossings = 0;
            double prev = xi.dot(pts[0]) - p;
            for (std::size_t i = 1; i < pts.size(); ++i) {
                double cur = xi.dot(pts[i]) - p;
                if ((prev < 0.0) != (cur < 0.0)) ++crossings;
                prev = cur;
            }
            sample = range * chart.measure().density(xi, p) * crossings;
        }
        sum += sample;
        sum2 += sample * sample;
    }
    double mean = sum / samples;
    double var = std::max(0.0, sum2 / samples - mean * mean);
    rep.mc_estimate = 0.5 * sphere_area * mean;
    rep.mc_std_error = 0.5 * sphere_area * std::sqrt(var / samples);
    return rep;
}

/// Shoot a geodesic from x0 along dir and report the largest perpendicular
/// deviation from the straight line x0 + span(dir). Zero (to integrator
/// accuracy) for any projective metric.
inline double line_geodesic_deviation(const FinslerChart& chart, const Vec& x0, const Vec& dir,
                                      double length, const GeodesicOptions& opt = {}) {
    auto geo = shoot_geodesic(chart, x0, dir, length, opt);
    require(!geo.aborted, "line_geodesic_deviation: integrator aborted");
    Vec d = dir.normalized();
    double worst = 0.0;
    for (const auto& x : geo.x) {
        Vec rel = x - x0;
        worst = std::max(worst, (rel - rel.dot(d) * d).norm());
    }
    return worst;
}

}  // namespace finsler
