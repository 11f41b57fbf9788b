#include <doctest.h>

#include "finsler/cartan.hpp"
#include "finsler/densities.hpp"
#include "finsler/variation.hpp"

using namespace finsler;

namespace {

Vec vec2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

std::shared_ptr<RandersChart> wind_chart() {
    return std::make_shared<RandersChart>(
        2, [](const Vec& x) { return Mat((1.0 + 0.1 * x[0] * x[0]) * Mat::Identity(2, 2)); },
        [](const Vec& x) { return Vec(vec2(0.25, 0.15 * std::sin(x[0]))); });
}

}  // namespace

TEST_CASE("Euclidean coframe closed form") {
    auto eu = RiemannianChart::euclidean(2);
    for (double th : {0.0, 0.7, 2.4}) {
        auto fr = coframe(*eu, vec2(0.3, -0.5), th);
        // omega1 = cos dx1 + sin dx2, omega2 = -sin dx1 + cos dx2, omega3 = dth.
        Vec o1(3), o2(3);
        o1 << std::cos(th), std::sin(th), 0.0;
        o2 << -std::sin(th), std::cos(th), 0.0;
        CHECK((fr.omega1 - o1).norm() < 1e-10);
        CHECK((fr.omega2 - o2).norm() < 1e-10);
        CHECK(std::abs(fr.omega3[0]) < 1e-7);
        CHECK(std::abs(fr.omega3[1]) < 1e-7);
        CHECK(fr.omega3[2] == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("omega1 is the Hilbert form; omega2 kills curve lifts; omega3 sees the fiber") {
    auto chart = wind_chart();
    Rng rng(41);
    for (int trial = 0; trial < 5; ++trial) {
        Vec x = rng.gaussian_vector(2);
        double th = rng.uniform(0.0, 2.0 * kPi);
        auto fr = coframe(*chart, x, th);
        Vec dx = rng.gaussian_vector(2);
        TangentBundlePoint p{x, fr.v};
        double hilbert = hilbert_one_form(*chart, p, dx, Vec(Vec::Zero(2)));
        CHECK(fr.omega1.head(2).dot(dx) == doctest::Approx(hilbert).epsilon(1e-9));
        // Tangent lift of a curve with velocity v annihilates omega2.
        Vec lift(3);
        lift << fr.v[0], fr.v[1], rng.normal();  // any dtheta: omega2 has none
        CHECK(std::abs(fr.omega2.head(2).dot(fr.v)) < 1e-10);
        // omega3 does not vanish on the fiber direction.
        CHECK(std::abs(fr.omega3[2]) > 0.1);
        // Coframe is a basis.
        Mat m(3, 3);
        m.row(0) = fr.omega1;
        m.row(1) = fr.omega2;
        m.row(2) = fr.omega3;
        CHECK(std::abs(m.determinant()) > 1e-3);
    }
}

TEST_CASE("invariants: Euclidean plane is (0, 0, 0)") {
    auto eu = RiemannianChart::euclidean(2);
    auto inv = invariants_IJK(*eu, vec2(0.2, 0.4), 0.9);
    CHECK(std::abs(inv.I) < 1e-8);
    CHECK(std::abs(inv.J) < 1e-8);
    CHECK(std::abs(inv.K) < 1e-6);
    CHECK(inv.residuals.maxCoeff() < 1e-8);
}

TEST_CASE("invariants: round sphere has I = 0, K = 1") {
    auto sph = RiemannianChart::stereographic_sphere(2);
    Rng rng(43);
    for (int trial = 0; trial < 4; ++trial) {
        Vec x = 0.6 * rng.gaussian_vector(2);
        double th = rng.uniform(0.0, 2.0 * kPi);
        auto inv = invariants_IJK(*sph, x, th);
        CHECK(std::abs(inv.I) < 1e-4);  // Riemannian
        CHECK(inv.K == doctest::Approx(1.0).epsilon(1e-3));
        CHECK(inv.residuals.maxCoeff() < 1e-4);
    }
}

TEST_CASE("invariants: Randers surfaces have I != 0 and clean residuals") {
    auto chart = wind_chart();
    Rng rng(44);
    double max_abs_i = 0.0;
    for (int trial = 0; trial < 6; ++trial) {
        Vec x = 0.8 * rng.gaussian_vector(2);
        double th = rng.uniform(0.0, 2.0 * kPi);
        auto inv = invariants_IJK(*chart, x, th);
        CHECK(inv.residuals.maxCoeff() < 1e-4);
        max_abs_i = std::max(max_abs_i, std::abs(inv.I));
    }
    CHECK(max_abs_i > 1e-2);  // genuinely non-Riemannian
}

TEST_CASE("structure residuals stay small across a point cloud") {
    auto chart = wind_chart();
    Rng rng(45);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Vec x = rng.gaussian_vector(2);
        double th = rng.uniform(0.0, 2.0 * kPi);
        worst = std::max(worst, invariants_IJK(*chart, x, th).residuals.maxCoeff());
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("curve curvature: circles and geodesics") {
    auto eu = RiemannianChart::euclidean(2);
    // Counterclockwise circle of radius R: k = 1/R at any speed.
    for (double R : {0.5, 2.0}) {
        for (double s : {1.0, 2.3}) {
            double t = 0.8;
            Vec pos = vec2(R * std::cos(t), R * std::sin(t));
            Vec vel = s * vec2(-R * std::sin(t), R * std::cos(t));
            Vec acc = s * s * vec2(-R * std::cos(t), -R * std::sin(t));
            CHECK(curve_curvature(*eu, pos, vel, acc) == doctest::Approx(1.0 / R).epsilon(1e-6));
        }
    }
    // Geodesics of a curved chart have zero geodesic curvature.
    auto chart = wind_chart();
    auto geo = shoot_geodesic(*chart, vec2(0.1, -0.2), vec2(1.0, 0.6), 1.0, {.step = 5e-4});
    for (std::size_t i = 200; i + 200 < geo.t.size(); i += 300) {
        double dt = geo.t[i + 1] - geo.t[i - 1];
        Vec acc = (geo.v[i + 1] - geo.v[i - 1]) / dt;
        CHECK(std::abs(curve_curvature(*chart, geo.x[i], geo.v[i], acc)) < 1e-5);
    }
    // Sphere-chart geodesic too.
    auto sph = RiemannianChart::stereographic_sphere(2);
    auto geo2 = shoot_geodesic(*sph, vec2(0.2, 0.1), vec2(0.5, -1.0), 1.0, {.step = 5e-4});
    std::size_t m = geo2.t.size() / 2;
    Vec acc2 = (geo2.v[m + 1] - geo2.v[m - 1]) / (geo2.t[m + 1] - geo2.t[m - 1]);
    CHECK(std::abs(curve_curvature(*sph, geo2.x[m], geo2.v[m], acc2)) < 1e-5);
}

TEST_CASE("h = -k omega2 matches the variational mean curvature (symmetric chart)") {
    // Riemannian surface (symmetric norm, so the HT 1-density equals F) and a
    // non-geodesic circle.
    auto chart = std::make_shared<RiemannianChart>(2, [](const Vec& x) {
        return Mat((1.0 + 0.15 * x[0]) * Mat::Identity(2, 2));
    });
    const double R = 1.3;
    ImmersedPatch circ;
    circ.domain_dim = 1;
    circ.ambient_dim = 2;
    circ.map = [R](const Vec& u) { return Vec(vec2(R * std::cos(u[0]), R * std::sin(u[0]))); };
    circ.jacobian = [R](const Vec& u) {
        Mat j(2, 1);
        j << -R * std::sin(u[0]), R * std::cos(u[0]);
        return j;
    };
    Box dom(Vec(Vec::Constant(1, -kPi)), Vec(Vec::Constant(1, kPi)));
    Vec u0(1);
    u0 << 0.4;
    auto h = mean_curvature_covector(*chart, circ, u0, 0.35, dom, {.grid = 32});

    double t = u0[0];
    Vec pos = vec2(R * std::cos(t), R * std::sin(t));
    Vec vel = vec2(-R * std::sin(t), R * std::cos(t));
    Vec acc = vec2(-R * std::cos(t), -R * std::sin(t));
    double k = curve_curvature(*chart, pos, vel, acc);
    auto fr = coframe(*chart, pos, std::atan2(vel[1], vel[0]));
    Vec h_cartan = -k * fr.omega2.head(2);
    CHECK((h.h - h_cartan).norm() < 0.01 * h_cartan.norm());
}
