#pragma once

#include "finsler/chart.hpp"

namespace finsler {

/// Canonical coframe of a Finsler surface at a unit-bundle point, expressed on
/// the coordinates (x1, x2, theta) where theta is the angle of the direction
/// u(theta) = (cos, sin) and v = u/F(x, u) is the unit vector.
struct SurfaceCoframe {
    Vec x;          // base point (2)
    double theta;   // fiber coordinate
    Vec v, w;       // unit vector and its g_v-orthonormal oriented completion
    Vec omega1;     // components on (dx1, dx2, dtheta)
    Vec omega2;
    Vec omega3;
};

struct CartanInvariants {
    double I = 0.0;  // Cartan scalar (0 iff Riemannian)
    double J = 0.0;  // Landsberg-type invariant
    double K = 0.0;  // flag curvature
    Vec residuals;   // unused structure-equation components (should be ~0)
    double c = 0.0;  // dtheta coefficient of omega3 (nonzero on the fiber)
};

namespace detail {

/// Rows (omega1; omega2) on (dx1, dx2, dtheta) at y = (x1, x2, theta):
/// Dpi(X) = omega1(X) v + omega2(X) w, so the dx-block is [v w]^{-1} and the
/// dtheta column vanishes.
inline Mat cartan_omega12(const FinslerChart& chart, const Vec& y, Vec* v_out = nullptr,
                          Vec* w_out = nullptr) {
    Vec x = y.head(2);
    Vec u(2);
    u << std::cos(y[2]), std::sin(y[2]);
    double f = chart.value(x, u);
    require(f > 0.0, "cartan: F(x, u) must be positive");
    Vec v = u / f;
    Mat g = chart.fundamental_tensor(x, v);
    // w: g-orthogonal to v, g-unit, oriented det[v, w] > 0.
    Vec p(2);
    p << -v[1], v[0];
    Vec w = p - (v.dot(g * p) / v.dot(g * v)) * v;
    w /= std::sqrt(w.dot(g * w));
    Mat vw(2, 2);
    vw.col(0) = v;
    vw.col(1) = w;
    if (vw.determinant() < 0.0) {
        w = -w;
        vw.col(1) = w;
    }
    Mat inv = vw.inverse();
    Mat rows = Mat::Zero(2, 3);
    rows.block(0, 0, 2, 2) = inv;
    if (v_out) *v_out = v;
    if (w_out) *w_out = w;
    return rows;
}

/// Exterior derivative of a 1-form field on (x1, x2, theta) by central FD:
/// D(i, j) = d_i omega_j - d_j omega_i.
inline Mat cartan_d(const std::function<Vec(const Vec&)>& form, const Vec& y, double h) {
    Mat jac(3, 3);  // jac(i, j) = d omega_j / d y_i
    for (int i = 0; i < 3; ++i) {
        Vec yp = y, ym = y;
        yp[i] += h;
        ym[i] -= h;
        jac.row(i) = ((form(yp) - form(ym)) / (2.0 * h)).transpose();
    }
    return jac - jac.transpose();
}

/// Coefficients (A, B, C) of a 2-form eta (given by its antisymmetric matrix
/// D on coordinate directions) on the basis (w1^w2, w1^dtheta, w2^dtheta),
/// where (w1, w2) are the first two coframe rows.
inline Vec expand_two_form(const Mat& d, const Mat& omega12) {
    Mat m = Mat::Zero(3, 3);
    m.block(0, 0, 2, 3) = omega12;
    m(2, 2) = 1.0;  // dtheta row
    Mat e = m.inverse();  // columns: frame dual to (w1, w2, dtheta)
    auto eval = [&](int a, int b) { return (e.col(a).transpose() * d * e.col(b))(0, 0); };
    Vec out(3);
    out << eval(0, 1), eval(0, 2), eval(1, 2);
    return out;
}

struct Omega3Data {
    Vec omega3;      // components on (dx1, dx2, dtheta)
    double a, b, c;  // omega3 = a w1 + b w2 + c dtheta
    double I;
    Vec residuals;   // (B of d w1, B' - c consistency)
};

/// omega3 = a w1 + b w2 + c dtheta from the first two structure equations
/// d w1 = -w2 ^ w3 and d w2 = w1 ^ w3 - I w2 ^ w3.
inline Omega3Data cartan_omega3(const FinslerChart& chart, const Vec& y, double h_inner) {
    auto form12 = [&](const Vec& z) { return cartan_omega12(chart, z); };
    Mat center = form12(y);
    Vec d1 = expand_two_form(
        cartan_d([&](const Vec& z) { return Vec(form12(z).row(0)); }, y, h_inner), center);
    Vec d2 = expand_two_form(
        cartan_d([&](const Vec& z) { return Vec(form12(z).row(1)); }, y, h_inner), center);
    Omega3Data out;
    // d w1 = A w1^w2 + B w1^dth + C w2^dth = a w1^w2 - c w2^dth.
    out.a = d1[0];
    out.c = -d1[2];
    require(std::abs(out.c) > 1e-8, "cartan: degenerate omega3 (c ~ 0)");
    // d w2 = (b + I a) w1^w2 + c w1^dth - I c w2^dth.
    out.I = -d2[2] / out.c;
    out.b = d2[0] - out.I * out.a;
    out.residuals = Vec(2);
    out.residuals << std::abs(d1[1]), std::abs(d2[1] - out.c);
    out.omega3 = out.a * center.row(0).transpose() + out.b * center.row(1).transpose();
    out.omega3[2] += out.c;
    return out;
}

}  // namespace detail

inline SurfaceCoframe coframe(const FinslerChart& chart, const Vec& x, double theta,
                              double fd_inner = 1e-4) {
    require(chart.dim() == 2, "coframe: surface charts only");
    Vec y(3);
    y << x[0], x[1], theta;
    SurfaceCoframe out;
    out.x = x;
    out.theta = theta;
    Mat rows = detail::cartan_omega12(chart, y, &out.v, &out.w);
    out.omega1 = rows.row(0);
    out.omega2 = rows.row(1);
    out.omega3 = detail::cartan_omega3(chart, y, fd_inner).omega3;
    return out;
}

/// Cartan invariants I, J, K from the structure equations
///   d w1 = -w2 ^ w3,  d w2 = w1 ^ w3 - I w2 ^ w3,  d w3 = -K w1 ^ w2 - J w2 ^ w3,
/// with the two exterior derivatives nested as finite differences.
inline CartanInvariants invariants_IJK(const FinslerChart& chart, const Vec& x, double theta,
                                       double h_inner = 1e-4, double h_outer = 2e-3) {
    require(chart.dim() == 2, "invariants_IJK: surface charts only");
    Vec y(3);
    y << x[0], x[1], theta;
    auto base = detail::cartan_omega3(chart, y, h_inner);
    Mat center = detail::cartan_omega12(chart, y);
    Vec d3 = detail::expand_two_form(
        detail::cartan_d(
            [&](const Vec& z) { return detail::cartan_omega3(chart, z, h_inner).omega3; }, y,
            h_outer),
        center);
    CartanInvariants out;
    out.I = base.I;
    out.c = base.c;
    // d w3 = (J a - K) w1^w2 + B'' w1^dth - J c w2^dth.
    out.J = -d3[2] / base.c;
    out.K = out.J * base.a - d3[0];
    out.residuals = Vec(3);
    out.residuals << base.residuals[0], base.residuals[1], std::abs(d3[1]);
    return out;
}

/// Signed geodesic curvature of a plane curve through (pos, vel, acc):
/// k = w3(V) / w1(V) with V = (vel, dtheta/dt) the tangent lift.
inline double curve_curvature(const FinslerChart& chart, const Vec& pos, const Vec& vel,
                              const Vec& acc, double fd_inner = 1e-4) {
    double theta = std::atan2(vel[1], vel[0]);
    double theta_dot = (vel[0] * acc[1] - vel[1] * acc[0]) / vel.squaredNorm();
    auto frame = coframe(chart, pos, theta, fd_inner);
    Vec lift(3);
    lift << vel[0], vel[1], theta_dot;
    return frame.omega3.dot(lift) / frame.omega1.dot(lift);
}

}  // namespace finsler
