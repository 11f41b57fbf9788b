#pragma once

#include "finsler/common.hpp"
#include "finsler/exterior.hpp"
#include "finsler/norms.hpp"

namespace finsler {

struct CubatureOptions {
    int circle_nodes = 128;    // trapezoid nodes for k = 2 integrals
    int polar_nodes = 24;      // Gauss-Legendre nodes in cos(polar) for k = 3
    int azimuth_nodes = 48;    // trapezoid nodes in azimuth for k = 3
    double fd_theta = 1e-5;    // step for the Legendre-image derivatives
    bool error_estimate = false;
};

struct DensityValue {
    double value = 0.0;
    double error_estimate = 0.0;
};

enum class DensityKind { HolmesThompson, BusemannHausdorff };

namespace detail {

/// Volume of the polar of the unit ball of `norm` (dim k <= 3) by the polar
/// formula vol = (1/k) \int_{S^{k-1}} h(u)^{-k} du, h the support function of
/// the unit ball, i.e. the dual norm.
inline double polar_dual_ball_volume(const MinkowskiNorm& norm, const CubatureOptions& opt) {
    const int k = norm.dim();
    if (k == 1) {
        Vec e(1);
        e << 1.0;
        double fp = norm.value(e);
        e << -1.0;
        double fm = norm.value(e);
        return fp + fm;
    }
    if (k == 2) {
        // The dual ball's support function is F itself, so its area is
        // (1/2) \oint (h^2 - h'^2) dtheta with h(theta) = F(cos, sin) and
        // h' = dF . (-sin, cos). Primal evaluations only: no dual norm.
        const int m = opt.circle_nodes;
        double acc = 0.0;
        Vec u(2), perp(2);
        for (int i = 0; i < m; ++i) {
            double th = 2.0 * kPi * i / m;
            u << std::cos(th), std::sin(th);
            perp << -u[1], u[0];
            double h = norm.value(u);
            double hp = norm.gradient(u).dot(perp);
            acc += h * h - hp * hp;
        }
        return 0.5 * acc * 2.0 * kPi / m;
    }
    require(k == 3, "polar_dual_ball_volume: k <= 3");
    Quadrature1D gl = gauss_legendre(opt.polar_nodes);
    const int m = opt.azimuth_nodes;
    double acc = 0.0;
    Vec u(3);
    for (int it = 0; it < gl.nodes.size(); ++it) {
        double t = gl.nodes[it];
        double s = std::sqrt(std::max(0.0, 1.0 - t * t));
        for (int j = 0; j < m; ++j) {
            double ps = 2.0 * kPi * j / m;
            u << s * std::cos(ps), s * std::sin(ps), t;
            double h = norm.dual(u);
            acc += gl.weights[it] * (2.0 * kPi / m) / (h * h * h);
        }
    }
    return acc / 3.0;
}

/// Volume of the unit ball itself, same polar formula with the primal norm.
inline double primal_ball_volume(const MinkowskiNorm& norm, const CubatureOptions& opt) {
    const int k = norm.dim();
    if (k == 1) {
        Vec e(1);
        e << 1.0;
        double fp = norm.value(e);
        e << -1.0;
        double fm = norm.value(e);
        return 1.0 / fp + 1.0 / fm;
    }
    if (k == 2) {
        const int m = opt.circle_nodes;
        double acc = 0.0;
        Vec u(2);
        for (int i = 0; i < m; ++i) {
            double th = 2.0 * kPi * i / m;
            u << std::cos(th), std::sin(th);
            double f = norm.value(u);
            acc += 1.0 / (f * f);
        }
        return 0.5 * acc * 2.0 * kPi / m;
    }
    require(k == 3, "primal_ball_volume: k <= 3");
    Quadrature1D gl = gauss_legendre(opt.polar_nodes);
    const int m = opt.azimuth_nodes;
    double acc = 0.0;
    Vec u(3);
    for (int it = 0; it < gl.nodes.size(); ++it) {
        double t = gl.nodes[it];
        double s = std::sqrt(std::max(0.0, 1.0 - t * t));
        for (int j = 0; j < m; ++j) {
            double ps = 2.0 * kPi * j / m;
            u << s * std::cos(ps), s * std::sin(ps), t;
            double f = norm.value(u);
            acc += gl.weights[it] * (2.0 * kPi / m) / (f * f * f);
        }
    }
    return acc / 3.0;
}

inline CubatureOptions halved(const CubatureOptions& opt) {
    CubatureOptions h = opt;
    h.circle_nodes = std::max(8, opt.circle_nodes / 2);
    h.polar_nodes = std::max(4, opt.polar_nodes / 2);
    h.azimuth_nodes = std::max(8, opt.azimuth_nodes / 2);
    return h;
}

}  // namespace detail

/// Holmes-Thompson k-density: phi(a) = (1/eps_k) * volume, measured with a, of
/// the projection of the dual unit ball onto span(a)*; computed as the polar
/// volume of the dual ball of the restricted norm. The discretized Crofton
/// norms carry an exact zonogon formula for k = 2 and bypass the cubature.
inline DensityValue ht_density_full(NormPtr norm, const SimpleKVector& a,
                                    const CubatureOptions& opt = {}) {
    require(norm->dim() == a.dim(), "ht_density: dimension mismatch");
    double mag = a.magnitude();
    if (mag == 0.0) return {0.0, 0.0};
    Mat q = a.span_basis();
    NormPtr fr = restricted_of(norm, q);
    const int k = a.grade();
    double eps_k = unit_ball_volume(k);
    if (k == 2) {
        if (auto* dc = dynamic_cast<const DiscreteCosineNorm*>(fr.get()))
            return {mag * dc->dual_ball_area() / eps_k, 0.0};
    }
    double vol = detail::polar_dual_ball_volume(*fr, opt);
    DensityValue out{mag * vol / eps_k, 0.0};
    if (opt.error_estimate && k >= 2) {
        double coarse = detail::polar_dual_ball_volume(*fr, detail::halved(opt));
        out.error_estimate = std::abs(mag * (vol - coarse) / eps_k);
    }
    return out;
}

inline double ht_density(NormPtr norm, const SimpleKVector& a, const CubatureOptions& opt = {}) {
    return ht_density_full(std::move(norm), a, opt).value;
}

/// Busemann (Hausdorff) k-density: eps_k divided by the a-measured volume of
/// the unit-ball slice B intersect span(a). Used for comparison experiments.
inline DensityValue busemann_hausdorff_density_full(NormPtr norm, const SimpleKVector& a,
                                                    const CubatureOptions& opt = {}) {
    require(norm->dim() == a.dim(), "bh_density: dimension mismatch");
    double mag = a.magnitude();
    if (mag == 0.0) return {0.0, 0.0};
    Mat q = a.span_basis();
    NormPtr fr = restricted_of(norm, q);
    const int k = a.grade();
    double eps_k = unit_ball_volume(k);
    double vol = detail::primal_ball_volume(*fr, opt);
    DensityValue out{mag * eps_k / vol, 0.0};
    if (opt.error_estimate && k >= 2) {
        double coarse = detail::primal_ball_volume(*fr, detail::halved(opt));
        out.error_estimate = std::abs(mag * eps_k / vol - mag * eps_k / coarse);
    }
    return out;
}

inline double busemann_hausdorff_density(NormPtr norm, const SimpleKVector& a,
                                         const CubatureOptions& opt = {}) {
    return busemann_hausdorff_density_full(std::move(norm), a, opt).value;
}

inline double density(NormPtr norm, const SimpleKVector& a, DensityKind kind,
                      const CubatureOptions& opt = {}) {
    return kind == DensityKind::HolmesThompson ? ht_density(std::move(norm), a, opt)
                                               : busemann_hausdorff_density(std::move(norm), a, opt);
}

struct BusemannForm {
    SimpleKVector base;
    KCovector value;
};

/// Busemann form beta_a(b) = (1/(k eps_k)) \int_{Sigma_a} i_chi b. The
/// singular locus is never root-found: Sigma_a = L1(span(a) cut with S) is
/// parametrized through the Legendre map of the norm, p(theta) = L1(v(theta)),
/// and the integrand is the pairing <b, p ^ d p / d theta ...>.
/// Orientation comes from the oriented frame of span(a); the sign convention
/// is pinned by beta_a(a) = phi(a) > 0 on the Euclidean case.
inline KCovector busemann_form_covector(NormPtr norm, const SimpleKVector& a,
                                        const CubatureOptions& opt = {}) {
    const int n = a.dim();
    const int k = a.grade();
    require(norm->dim() == n, "busemann_form: dimension mismatch");
    require(a.magnitude() > 1e-14 * std::max(1.0, a.factors().norm()),
            "busemann_form: degenerate k-vector");
    Mat q = a.span_basis();
    const double eps_k = unit_ball_volume(k);

    auto unit_point = [&](const Vec& w) {
        Vec v = q * w;
        return Vec(v / norm->value(v));
    };
    auto legendre_at = [&](const Vec& w) { return Vec(norm->energy_gradient(unit_point(w))); };

    auto combos = combinations(n, k);
    Vec comps = Vec::Zero(static_cast<long>(combos.size()));
    auto accumulate = [&](const Mat& cov_factors, double weight) {
        Mat sub(k, k);
        for (std::size_t ci = 0; ci < combos.size(); ++ci) {
            for (int r = 0; r < k; ++r) sub.row(r) = cov_factors.row(combos[ci][r]);
            comps[static_cast<long>(ci)] += weight * sub.determinant();
        }
    };

    if (k == 1) {
        // Sigma_a is the two Legendre images of the unit vectors of span(a),
        // signed by the orientation of the line.
        Vec e(1);
        e << 1.0;
        Vec pp = legendre_at(e);
        e << -1.0;
        Vec pm = legendre_at(e);
        Vec c = (pp - pm) / (1.0 * eps_k);  // k * eps_k with k = 1
        return KCovector(n, 1, c);
    }

    const double h = opt.fd_theta;
    if (k == 2) {
        const int m = opt.circle_nodes;
        Mat cov(n, 2);
        for (int i = 0; i < m; ++i) {
            double th = 2.0 * kPi * i / m;
            Vec w(2), wp(2), wm(2);
            w << std::cos(th), std::sin(th);
            wp << std::cos(th + h), std::sin(th + h);
            wm << std::cos(th - h), std::sin(th - h);
            cov.col(0) = legendre_at(w);
            cov.col(1) = (legendre_at(wp) - legendre_at(wm)) / (2.0 * h);
            accumulate(cov, 2.0 * kPi / m);
        }
        comps /= (k * eps_k);
        return KCovector(n, 2, comps);
    }

    require(k == 3, "busemann_form: k <= 3 supported");
    // Sphere parametrized by (azimuth, polar t); this ordering of the partial
    // derivatives carries the boundary orientation (validated on Euclidean).
    Quadrature1D gl = gauss_legendre(opt.polar_nodes);
    const int m = opt.azimuth_nodes;
    Mat cov(n, 3);
    auto wvec = [](double t, double ps) {
        Vec w(3);
        double s = std::sqrt(std::max(0.0, 1.0 - t * t));
        w << s * std::cos(ps), s * std::sin(ps), t;
        return w;
    };
    for (int it = 0; it < gl.nodes.size(); ++it) {
        double t = gl.nodes[it];
        for (int j = 0; j < m; ++j) {
            double ps = 2.0 * kPi * j / m;
            cov.col(0) = legendre_at(wvec(t, ps));
            cov.col(1) = (legendre_at(wvec(t, ps + h)) - legendre_at(wvec(t, ps - h))) / (2.0 * h);
            cov.col(2) = (legendre_at(wvec(t + h, ps)) - legendre_at(wvec(t - h, ps))) / (2.0 * h);
            accumulate(cov, gl.weights[it] * 2.0 * kPi / m);
        }
    }
    comps /= (k * eps_k);
    return KCovector(n, 3, comps);
}

inline BusemannForm busemann_form(NormPtr norm, const SimpleKVector& a,
                                  const CubatureOptions& opt = {}) {
    return BusemannForm{a, busemann_form_covector(std::move(norm), a, opt)};
}

/// Legendre map for the Holmes-Thompson density: L(a) = phi(a) beta_a.
inline KCovector ht_legendre(NormPtr norm, const SimpleKVector& a,
                             const CubatureOptions& opt = {}) {
    double phi = ht_density(norm, a, opt);
    return busemann_form_covector(std::move(norm), a, opt) * phi;
}

struct CalibrationReport {
    double max_violation = -std::numeric_limits<double>::infinity();
    SimpleKVector argmax{Mat::Identity(1, 1)};
    double base_equality_gap = 0.0;  // |beta_a(a) - phi(a)|
    int samples = 0;
};

/// Sample simple b within an angular neighborhood of a and report the largest
/// violation of beta_a(b) <= phi(b).
inline CalibrationReport local_calibration_check(NormPtr norm, const SimpleKVector& a,
                                                 double radius, int samples, std::uint64_t seed,
                                                 const CubatureOptions& opt = {}) {
    const int n = a.dim();
    const int k = a.grade();
    KCovector beta = busemann_form_covector(norm, a, opt);
    CalibrationReport rep;
    rep.base_equality_gap = std::abs(pair(beta, a) - ht_density(norm, a, opt));
    rep.samples = samples;
    rep.argmax = a;

    Mat q = a.span_basis();
    Rng rng(seed);
    for (int s = 0; s < samples; ++s) {
        // Tilt each frame vector by a principal angle <= radius, then take a
        // random positively oriented in-plane mix so magnitudes vary too.
        Mat f(n, k);
        for (int j = 0; j < k; ++j) {
            Vec z = rng.gaussian_vector(n);
            z -= q * (q.transpose() * z);
            double tau = rng.uniform(0.0, radius);
            if (z.norm() > 1e-12)
                f.col(j) = std::cos(tau) * q.col(j) + std::sin(tau) * z.normalized();
            else
                f.col(j) = q.col(j);
        }
        Mat mix = Mat::Identity(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) mix(i, j) += 0.3 * rng.normal();
        if (mix.determinant() < 0) mix.col(0) *= -1.0;
        SimpleKVector b(Mat(f * mix));
        if (b.magnitude() < 1e-9) continue;
        double violation = pair(beta, b) - ht_density(norm, b, opt);
        if (violation > rep.max_violation) {
            rep.max_violation = violation;
            rep.argmax = b;
        }
    }
    return rep;
}

}  // namespace finsler
