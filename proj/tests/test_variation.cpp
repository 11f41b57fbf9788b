#include <doctest.h>

#include "finsler/crofton.hpp"
#include "finsler/variation.hpp"

using namespace finsler;

namespace {

Vec vec2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

Vec vec3(double x, double y, double z) {
    Vec v(3);
    v << x, y, z;
    return v;
}

ImmersedPatch xy_plane() {
    Mat dirs(3, 2);
    dirs << 1, 0, 0, 1, 0, 0;
    return ImmersedPatch::affine(Vec(Vec::Zero(3)), dirs);
}

/// Sphere cap of radius R around the north pole, graph coordinates.
ImmersedPatch sphere_patch(double R) {
    ImmersedPatch p;
    p.domain_dim = 2;
    p.ambient_dim = 3;
    p.map = [R](const Vec& u) {
        double r2 = u.squaredNorm();
        return Vec(vec3(u[0], u[1], std::sqrt(R * R - r2)));
    };
    p.jacobian = [R](const Vec& u) {
        double z = std::sqrt(R * R - u.squaredNorm());
        Mat j(3, 2);
        j << 1, 0, 0, 1, -u[0] / z, -u[1] / z;
        return j;
    };
    return p;
}

ImmersedPatch circle_patch(double R) {
    ImmersedPatch p;
    p.domain_dim = 1;
    p.ambient_dim = 3;
    p.map = [R](const Vec& u) { return Vec(vec3(R * std::cos(u[0]), R * std::sin(u[0]), 0.0)); };
    p.jacobian = [R](const Vec& u) {
        Mat j(3, 1);
        j << -R * std::sin(u[0]), R * std::cos(u[0]), 0.0;
        return j;
    };
    return p;
}

}  // namespace

TEST_CASE("ht_volume: flat squares and the sphere octant") {
    auto eu = RiemannianChart::euclidean(3);
    Box unit(Vec(Vec::Zero(2)), Vec(Vec::Ones(2)));
    CHECK(ht_volume(*eu, xy_plane(), unit) == doctest::Approx(1.0).epsilon(1e-10));

    // Unit-sphere octant: area pi/2. Graph coordinates over the quarter disk
    // are singular at the equator, so take the cap above z = cos(phi) and add
    // the analytic band area; simpler: integrate a polar-parametrized octant.
    ImmersedPatch octant;
    octant.domain_dim = 2;
    octant.ambient_dim = 3;
    octant.map = [](const Vec& u) {
        // u = (phi, psi) in [0, pi/2]^2
        return Vec(vec3(std::sin(u[0]) * std::cos(u[1]), std::sin(u[0]) * std::sin(u[1]),
                        std::cos(u[0])));
    };
    Box dom(Vec(vec2(1e-6, 0.0)), Vec(vec2(kPi / 2, kPi / 2)));
    VolumeOptions opt;
    opt.grid = 48;
    opt.error_estimate = true;
    auto v = ht_volume_full(*eu, octant, dom, opt);
    CHECK(v.value == doctest::Approx(kPi / 2).epsilon(1e-4));
    CHECK(v.error_estimate < 1e-6);

    // Constant Randers chart: HT volume of a flat plane patch equals Euclidean.
    ConstantChart randers(std::make_shared<RandersNorm>(Mat::Identity(3, 3), vec3(0.3, 0, 0)), 3);
    CHECK(ht_volume(randers, xy_plane(), unit) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ht_volume is reparametrization invariant") {
    auto eu = RiemannianChart::stereographic_sphere(2);
    ImmersedPatch patch;
    patch.domain_dim = 2;
    patch.ambient_dim = 2;
    patch.map = [](const Vec& u) { return u; };
    Box dom(Vec(vec2(-0.4, -0.4)), Vec(vec2(0.5, 0.3)));
    double direct = ht_volume(*eu, patch, dom, {.grid = 48});

    // Orientation-preserving nonlinear reparametrization of the same region.
    ImmersedPatch repar;
    repar.domain_dim = 2;
    repar.ambient_dim = 2;
    repar.map = [](const Vec& t) {
        // t in [0,1]^2 -> smooth monotone warp onto [-0.4,0.5] x [-0.4,0.3]
        auto warp = [](double s) { return s + 0.15 * std::sin(kPi * s) * s * (1.0 - s); };
        return Vec(vec2(-0.4 + 0.9 * warp(t[0]), -0.4 + 0.7 * warp(t[1])));
    };
    Box unit(Vec(Vec::Zero(2)), Vec(Vec::Ones(2)));
    double warped = ht_volume(*eu, repar, unit, {.grid = 48});
    CHECK(warped == doctest::Approx(direct).epsilon(1e-8));
}

TEST_CASE("first variation: zero field, flat minimality, sphere cap") {
    auto eu = RiemannianChart::euclidean(3);
    Box dom(Vec(vec2(-1, -1)), Vec(vec2(1, 1)));
    VariationField zero = bump_field(vec2(0, 0), 0.5, Vec(Vec::Zero(3)));
    CHECK(first_variation(*eu, xy_plane(), zero, dom) == doctest::Approx(0.0));

    Rng rng(3);
    for (int i = 0; i < 3; ++i) {
        VariationField x = bump_field(vec2(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)),
                                      0.35, rng.gaussian_vector(3));
        CHECK(std::abs(first_variation(*eu, xy_plane(), x, dom, 1e-4, {.grid = 32})) < 1e-8);
    }

    // Sphere cap, outward-normal bump: area grows at rate 2 * int <n, X> dA.
    auto patch = sphere_patch(1.0);
    Box cap(Vec(vec2(-0.45, -0.45)), Vec(vec2(0.45, 0.45)));
    VariationField out;
    out.field = [&patch](const Vec& u) { return patch.map(u); };  // X = n on the unit sphere
    out.jacobian = [&patch](const Vec& u) { return patch.jac(u); };
    // Make it compactly supported: multiply by a bump.
    VariationField bump = bump_field(vec2(0, 0), 0.4, vec3(1, 0, 0));
    VariationField x;
    x.support = bump.support;
    x.field = [&](const Vec& u) {
        double r2 = (u / 0.4).squaredNorm();
        if (r2 >= 1.0) return Vec(Vec::Zero(3));
        double b = 1.0 - r2;
        return Vec(b * b * b * b * patch.map(u));
    };
    double dv = first_variation(*eu, patch, x, cap, 1e-4, {.grid = 48});
    // Oracle: 2 * int bump * <n, n> dA over the cap.
    Quadrature1D gl = gauss_legendre(48);
    double oracle = 0.0;
    for (int i = 0; i < 48; ++i)
        for (int j = 0; j < 48; ++j) {
            Vec u = vec2(-0.4 + 0.4 * (gl.nodes[i] + 1.0), -0.4 + 0.4 * (gl.nodes[j] + 1.0));
            double w = 0.16 * gl.weights[i] * gl.weights[j];
            double r2 = (u / 0.4).squaredNorm();
            if (r2 >= 1.0) continue;
            double b = 1.0 - r2;
            oracle += w * 2.0 * b * b * b * b * SimpleKVector(patch.jac(u)).magnitude();
        }
    CHECK(dv == doctest::Approx(oracle).epsilon(0.02));
    CHECK(dv > 0.0);  // outward variation grows the area
}

TEST_CASE("mean curvature: circle, sphere, plane oracles") {
    auto eu = RiemannianChart::euclidean(3);
    VolumeOptions opt;
    opt.grid = 32;

    // Circle of radius 2: |h| = 0.5, pointing outward.
    auto circ = circle_patch(2.0);
    Box dom1(Vec(Vec::Constant(1, -kPi)), Vec(Vec::Constant(1, kPi)));
    Vec u0(1);
    u0 << 0.3;
    auto h = mean_curvature_covector(*eu, circ, u0, 0.5, dom1, opt);
    Vec outward = h.base_point.normalized();
    CHECK(h.h.norm() == doctest::Approx(0.5).epsilon(0.01));
    CHECK(h.h.dot(outward) == doctest::Approx(0.5).epsilon(0.01));

    // Unit sphere: h = 2 <n_out | .>.
    auto sph = sphere_patch(1.0);
    Box dom2(Vec(vec2(-0.5, -0.5)), Vec(vec2(0.5, 0.5)));
    auto hs = mean_curvature_covector(*eu, sph, vec2(0.1, -0.05), 0.3, dom2, opt);
    Vec n_out = hs.base_point.normalized();
    CHECK(hs.h.norm() == doctest::Approx(2.0).epsilon(0.01));
    CHECK(hs.h.dot(n_out) == doctest::Approx(2.0).epsilon(0.01));

    // Flat plane: h = 0.
    Box dom3(Vec(vec2(-1, -1)), Vec(vec2(1, 1)));
    auto hp = mean_curvature_covector(*eu, xy_plane(), vec2(0, 0), 0.4, dom3, opt);
    CHECK(hp.h.norm() < 1e-8);
}

TEST_CASE("mean curvature is bump-profile independent within 1%") {
    auto eu = RiemannianChart::euclidean(3);
    auto sph = sphere_patch(1.0);
    Box dom(Vec(vec2(-0.5, -0.5)), Vec(vec2(0.5, 0.5)));
    VolumeOptions opt;
    opt.grid = 32;
    auto h1 = mean_curvature_covector(*eu, sph, vec2(0, 0), 0.3, dom, opt);
    auto h2 = mean_curvature_covector(*eu, sph, vec2(0, 0), 0.42, dom, opt);
    CHECK((h1.h - h2.h).norm() < 0.01 * h1.h.norm());
}

TEST_CASE("k = 1: mean curvature equals minus the Euler-Lagrange residual") {
    // Non-geodesic circle in a curved Riemannian chart.
    auto chart = std::make_shared<RiemannianChart>(3, [](const Vec& x) {
        return Mat((1.0 + 0.1 * x[0]) * Mat::Identity(3, 3));
    });
    auto circ = circle_patch(1.5);
    Box dom(Vec(Vec::Constant(1, -kPi)), Vec(Vec::Constant(1, kPi)));
    Vec u0(1);
    u0 << 0.7;
    auto h = mean_curvature_covector(*chart, circ, u0, 0.4, dom, {.grid = 32});

    // EL residual covector r = d/dt(dE/dv) - dE/dx along the unit-speed curve.
    auto unit_speed = [&](double t) {
        // Reparametrize by arclength around u0 numerically: for the residual we
        // only need the curve through the point with F = 1 speed; build it by
        // integrating dt/ds = 1/F.
        return t;
    };
    (void)unit_speed;
    // Sample the unit-speed reparametrized circle around u0 by solving
    // ds = F dt with RK2.
    std::vector<double> ts;
    double t = u0[0] - 0.02, s = 0.0;
    std::vector<Vec> xs, vs;
    std::vector<double> ss;
    const double hstep = 1e-4;
    while (t < u0[0] + 0.02) {
        Vec ut(1);
        ut << t;
        Vec x = circ.map(ut);
        Vec dxdt = circ.jac(ut).col(0);
        double f = chart->value(x, dxdt);
        xs.push_back(x);
        vs.push_back(dxdt / f);
        ss.push_back(s);
        double tm = t + 0.5 * hstep;
        Vec utm(1);
        utm << tm;
        double fm = chart->value(circ.map(utm), circ.jac(utm).col(0));
        s += hstep * 0.5 * (f + fm) * 1.0;  // ds = F dt
        t += hstep;
    }
    Geodesic curve;
    curve.t = ss;
    curve.x = xs;
    curve.v = vs;
    // Residual at the middle sample.
    std::size_t mid = curve.t.size() / 2;
    double dt = curve.t[mid + 1] - curve.t[mid - 1];
    Vec r = (chart->energy_grad_v(curve.x[mid + 1], curve.v[mid + 1]) -
             chart->energy_grad_v(curve.x[mid - 1], curve.v[mid - 1])) /
                dt -
            chart->energy_grad_x(curve.x[mid], curve.v[mid]);
    CHECK((h.h + r).norm() < 0.01 * r.norm());
}

TEST_CASE("dTheta validation path agrees with the variational h") {
    // k = 1: concentric circles in the Euclidean plane viewed in R^3.
    auto eu = RiemannianChart::euclidean(3);
    auto circ_section = [](const Vec& x) {
        Mat f(3, 1);
        Vec t = vec3(-x[1], x[0], 0.0).normalized();
        f.col(0) = t;
        return f;
    };
    Vec x0 = vec3(2.0, 0.0, 0.0);
    Vec h1 = mean_curvature_dtheta(*eu, circ_section, x0);
    // Circle radius 2: h = 0.5 outward.
    CHECK(h1[0] == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(std::abs(h1[1]) < 1e-3);
    CHECK(std::abs(h1[2]) < 1e-3);

    // k = 2: concentric spheres. h = (2/R) outward at radius R.
    auto sph_section = [](const Vec& x) {
        Vec n = x.normalized();
        // Oriented basis of n-perp with det[b1, b2, n] > 0.
        Vec seed = std::abs(n[0]) < 0.9 ? vec3(1, 0, 0) : vec3(0, 1, 0);
        Vec b1 = (seed - seed.dot(n) * n).normalized();
        Vec b2 = vec3(n[1] * b1[2] - n[2] * b1[1], n[2] * b1[0] - n[0] * b1[2],
                      n[0] * b1[1] - n[1] * b1[0]);
        Mat f(3, 2);
        f.col(0) = b1;
        f.col(1) = b2;
        return f;
    };
    Vec xs = vec3(0.0, 0.0, 1.25);
    Vec h2 = mean_curvature_dtheta(*eu, sph_section, xs);
    CHECK(h2[2] == doctest::Approx(2.0 / 1.25).epsilon(1e-3));
    CHECK(std::abs(h2[0]) < 1e-3);
    CHECK(std::abs(h2[1]) < 1e-3);

    // Prop. hilbert item (3): dTheta contracted with a vertical direction and
    // lifts of the base plane vanishes. Theta extended 0-homogeneously.
    auto randers = std::make_shared<ConstantChart>(
        std::make_shared<RandersNorm>(Mat::Identity(3, 3), vec3(0.25, 0.1, 0.0)), 3);
    Vec a0 = vec3(0.3, -0.2, 0.9);  // 2-vector components, lex basis
    SimpleKVector a_simple = simple_from_components(3, a0);
    Mat basis = a_simple.span_basis();
    Vec u1 = basis.col(0), u2 = basis.col(1);
    Vec x0r = vec3(0.1, 0.2, -0.3);
    Rng rng(9);
    auto theta_eval = [&](const Vec& x, const Vec& a, const Vec& b1, const Vec& b2) {
        Mat f(3, 2);
        f.col(0) = b1;
        f.col(1) = b2;
        NormPtr nm = randers->norm_at(x);
        return pair(busemann_form_covector(nm, simple_from_components(3, a)),
                    SimpleKVector(f));
    };
    const double eps = 1e-4;
    for (int trial = 0; trial < 3; ++trial) {
        Vec c = rng.gaussian_vector(3);  // vertical direction in Lambda^2 = R^3
        // dTheta((0,c), (u1,0), (u2,0)): Theta only eats base vectors, so the
        // mixed terms drop and only the vertical derivative of beta_a(u1 ^ u2)
        // survives. It vanishes because a maximizes a' -> beta_{a'}(a) (the
        // calibration touches phi exactly at a).
        double d_vert = (theta_eval(x0r, Vec(a0 + eps * c), u1, u2) -
                         theta_eval(x0r, Vec(a0 - eps * c), u1, u2)) /
                        (2.0 * eps);
        CHECK(std::abs(d_vert) < 1e-5 * c.norm());
    }
}

TEST_CASE("fiber identity: Euclidean, Randers, linearity") {
    auto eu = std::make_shared<ConstantChart>(EuclideanNorm::standard(3), 3);
    Mat q(3, 2);
    q << 1, 0, 0, 1, 0, 0;
    auto rep = fiber_identity_check(*eu, vec3(0, 0, 0), q, 3, 11);
    CHECK(rep.lhs == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(rep.max_gap < 1e-6);

    auto randers = std::make_shared<ConstantChart>(
        std::make_shared<RandersNorm>(Mat::Identity(3, 3), vec3(0.3, 0.1, -0.05)), 3);
    Mat q2(3, 2);
    q2 << 1, 0.2, 0.1, 1, -0.3, 0.4;
    auto rep2 = fiber_identity_check(*randers, vec3(0, 0, 0), q2, 4, 12);
    CHECK(rep2.max_gap < 1e-4 * std::max(1.0, std::abs(rep2.lhs)));

    // Linearity: scaling a factor scales both sides.
    Mat q3 = q2;
    q3.col(0) *= 2.5;
    auto rep3 = fiber_identity_check(*randers, vec3(0, 0, 0), q3, 0, 13);
    CHECK(rep3.lhs == doctest::Approx(2.5 * rep2.lhs).epsilon(1e-8));
    CHECK(rep3.rhs == doctest::Approx(2.5 * rep2.rhs).epsilon(1e-6));
}

TEST_CASE("fiber identity on an x-dependent Randers chart") {
    auto chart = std::make_shared<RandersChart>(
        3, [](const Vec& x) { return Mat((1.0 + 0.05 * x[0] * x[0]) * Mat::Identity(3, 3)); },
        [](const Vec& x) { return Vec(vec3(0.2, 0.1 * std::sin(x[2]), 0.0)); });
    Mat q(3, 2);
    q << 1, 0, 0.2, 1, 0.1, -0.3;
    auto rep = fiber_identity_check(*chart, vec3(0.3, -0.2, 0.5), q, 3, 17);
    CHECK(rep.max_gap < 1e-4 * std::max(1.0, std::abs(rep.lhs)));
}

TEST_CASE("main theorem: affine planes in Crofton metrics are minimal") {
    // Smooth bump measure in R^3; span(e1, e2) through the origin.
    auto chart = std::make_shared<CroftonChart>(
        3, std::make_shared<GaussianBumpMeasure>(1.0, 0.5),
        CroftonOptions{.polar_nodes = 8, .azimuth_nodes = 16, .circle_nodes = 32});
    Box dom(Vec(vec2(-1, -1)), Vec(vec2(1, 1)));
    VolumeOptions opt;
    opt.grid = 24;
    opt.cubature.circle_nodes = 32;
    auto rep = totally_geodesic_minimality_experiment(*chart, xy_plane(), dom, 5, 21, opt);
    CHECK(rep.max_ratio <= 1e-4);

    // The test discriminates: a curved patch shows first-order volume change.
    ImmersedPatch bent;
    bent.domain_dim = 2;
    bent.ambient_dim = 3;
    bent.map = [](const Vec& u) { return Vec(vec3(u[0], u[1], 0.4 * u[0] * u[0])); };
    VariationField x = bump_field(vec2(0, 0), 0.45, vec3(0, 0, 1));
    double dv = first_variation(*chart, bent, x, dom, 1e-4, opt);
    CHECK(std::abs(dv) > 1e-2);
}

TEST_CASE("discrete Crofton charts: exact minimality of affine planes") {
    // Frozen normals, smooth positive x-dependent weights.
    Rng rng(29);
    const int atoms = 14;
    Mat normals(3, atoms);
    for (int i = 0; i < atoms; ++i) normals.col(i) = rng.unit_vector(3);
    // Crofton structure: each atom's weight may depend on x only through the
    // hyperplane offset <xi_i, x>.
    DiscreteCroftonChart chart(normals, [normals, atoms](const Vec& x) {
        Vec c(atoms);
        for (int i = 0; i < atoms; ++i) {
            double p = normals.col(i).dot(x);
            c[i] = 1.0 + 0.3 * std::sin(p + 0.4 * i);
        }
        return c;
    });
    Box dom(Vec(vec2(-1, -1)), Vec(vec2(1, 1)));
    VolumeOptions opt;
    opt.grid = 32;
    auto rep = totally_geodesic_minimality_experiment(chart, xy_plane(), dom, 6, 31, opt);
    CHECK(rep.max_ratio <= 1e-6);
}

TEST_CASE("hausdorff comparison") {
    // Euclidean: BH and HT densities coincide, so the variations agree.
    auto eu = RiemannianChart::euclidean(3);
    auto sph = sphere_patch(1.0);
    Box dom(Vec(vec2(-0.5, -0.5)), Vec(vec2(0.5, 0.5)));
    VariationField x = bump_field(vec2(0, 0), 0.3, vec3(0.2, -0.1, 0.9));
    double ht = first_variation(*eu, sph, x, dom, 1e-4, {.grid = 32});
    double bh = hausdorff_comparison(*eu, sph, x, dom, 1e-4, {.grid = 32});
    CHECK(bh == doctest::Approx(ht).epsilon(1e-8));

    // Constant Randers chart, flat patch: both vanish by translation symmetry.
    ConstantChart randers(std::make_shared<RandersNorm>(Mat::Identity(3, 3), vec3(0.3, 0, 0)), 3);
    Box dom2(Vec(vec2(-1, -1)), Vec(vec2(1, 1)));
    VariationField y = bump_field(vec2(0.1, -0.2), 0.4, vec3(0.5, 0.5, 1.0));
    CHECK(std::abs(first_variation(randers, xy_plane(), y, dom2, 1e-4, {.grid = 32})) < 1e-8);
    CHECK(std::abs(hausdorff_comparison(randers, xy_plane(), y, dom2, 1e-4, {.grid = 32})) < 1e-8);
}
