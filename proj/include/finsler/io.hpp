#pragma once

#include "finsler/cartan.hpp"
#include "finsler/crofton.hpp"
#include "finsler/variation.hpp"

#include <json.hpp>

#include <string>

namespace finsler::io {

using json = nlohmann::json;

inline Vec parse_vector(const json& j) {
    require(j.is_array(), "io: expected an array");
    Vec v(static_cast<long>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<long>(i)] = j[i].get<double>();
    return v;
}

inline Mat parse_matrix(const json& j) {
    require(j.is_array() && !j.empty(), "io: expected a non-empty array of rows");
    Mat m(static_cast<long>(j.size()), static_cast<long>(j[0].size()));
    for (std::size_t r = 0; r < j.size(); ++r) {
        require(j[r].size() == j[0].size(), "io: ragged matrix");
        for (std::size_t c = 0; c < j[r].size(); ++c)
            m(static_cast<long>(r), static_cast<long>(c)) = j[r][c].get<double>();
    }
    return m;
}

inline json dump_vector(const Vec& v) {
    json j = json::array();
    for (long i = 0; i < v.size(); ++i) j.push_back(v[i]);
    return j;
}

/// Norm descriptor:
///   {"kind": "euclidean", "A": [[...], ...]}
///   {"kind": "randers", "A": [[...], ...], "b": [...]}
///   {"kind": "discrete_cosine", "normals": [[col], ...], "coefficients": [...]}
inline NormPtr parse_norm(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "euclidean") {
        if (j.contains("A")) return std::make_shared<EuclideanNorm>(parse_matrix(j.at("A")));
        return EuclideanNorm::standard(j.at("dim").get<int>());
    }
    if (kind == "randers")
        return std::make_shared<RandersNorm>(parse_matrix(j.at("A")), parse_vector(j.at("b")));
    if (kind == "discrete_cosine")
        return std::make_shared<DiscreteCosineNorm>(parse_matrix(j.at("normals")),
                                                    parse_vector(j.at("coefficients")));
    throw std::invalid_argument("io: unknown norm kind '" + kind + "'");
}

/// Measure descriptor:
///   {"kind": "constant", "value": 1.0}
///   {"kind": "gaussian_bump", "base": 1.0, "amplitude": 0.5}
inline MeasurePtr parse_measure(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") return std::make_shared<ConstantMeasure>(j.value("value", 1.0));
    if (kind == "gaussian_bump")
        return std::make_shared<GaussianBumpMeasure>(j.at("base").get<double>(),
                                                     j.at("amplitude").get<double>());
    throw std::invalid_argument("io: unknown measure kind '" + kind + "'");
}

/// Chart descriptor:
///   {"kind": "euclidean", "dim": n}
///   {"kind": "stereographic_sphere", "dim": 2}
///   {"kind": "constant_norm", "norm": {...}}
///   {"kind": "randers", "A": ..., "b": ...}        (constant coefficients)
///   {"kind": "crofton", "dim": n, "measure": {...}}
inline ChartPtr parse_chart(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "euclidean") return RiemannianChart::euclidean(j.at("dim").get<int>());
    if (kind == "stereographic_sphere")
        return RiemannianChart::stereographic_sphere(j.value("dim", 2));
    if (kind == "constant_norm") {
        NormPtr norm = parse_norm(j.at("norm"));
        return std::make_shared<ConstantChart>(norm, norm->dim());
    }
    if (kind == "randers") {
        Mat a = parse_matrix(j.at("A"));
        Vec b = parse_vector(j.at("b"));
        RandersNorm check(a, b);  // validate eagerly
        return std::make_shared<RandersChart>(
            static_cast<int>(a.rows()), [a](const Vec&) { return a; },
            [b](const Vec&) { return b; });
    }
    if (kind == "crofton") {
        CroftonOptions opt;
        opt.polar_nodes = j.value("polar_nodes", opt.polar_nodes);
        opt.azimuth_nodes = j.value("azimuth_nodes", opt.azimuth_nodes);
        return std::make_shared<CroftonChart>(j.at("dim").get<int>(),
                                              parse_measure(j.at("measure")), opt);
    }
    throw std::invalid_argument("io: unknown chart kind '" + kind + "'");
}

/// Patch descriptor:
///   {"kind": "affine", "origin": [...], "directions": [[col], ...]}
///   {"kind": "circle", "radius": R, "ambient_dim": n}
///   {"kind": "sphere_graph", "radius": R}               (graph over (u1,u2))
///   {"kind": "paraboloid", "coefficient": c}            (z = c*u1^2, in R^3)
inline ImmersedPatch parse_patch(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "affine")
        return ImmersedPatch::affine(parse_vector(j.at("origin")),
                                     parse_matrix(j.at("directions")));
    if (kind == "circle") {
        double r = j.at("radius").get<double>();
        int n = j.value("ambient_dim", 2);
        require(n == 2 || n == 3, "io: circle patch lives in R^2 or R^3");
        ImmersedPatch p;
        p.domain_dim = 1;
        p.ambient_dim = n;
        p.map = [r, n](const Vec& u) {
            Vec x = Vec::Zero(n);
            x[0] = r * std::cos(u[0]);
            x[1] = r * std::sin(u[0]);
            return x;
        };
        p.jacobian = [r, n](const Vec& u) {
            Mat m = Mat::Zero(n, 1);
            m(0, 0) = -r * std::sin(u[0]);
            m(1, 0) = r * std::cos(u[0]);
            return m;
        };
        return p;
    }
    if (kind == "sphere_graph") {
        double r = j.at("radius").get<double>();
        ImmersedPatch p;
        p.domain_dim = 2;
        p.ambient_dim = 3;
        p.map = [r](const Vec& u) {
            Vec x(3);
            x << u[0], u[1], std::sqrt(r * r - u.squaredNorm());
            return x;
        };
        p.jacobian = [r](const Vec& u) {
            double z = std::sqrt(r * r - u.squaredNorm());
            Mat m(3, 2);
            m << 1, 0, 0, 1, -u[0] / z, -u[1] / z;
            return m;
        };
        return p;
    }
    if (kind == "paraboloid") {
        double c = j.at("coefficient").get<double>();
        ImmersedPatch p;
        p.domain_dim = 2;
        p.ambient_dim = 3;
        p.map = [c](const Vec& u) {
            Vec x(3);
            x << u[0], u[1], c * u[0] * u[0];
            return x;
        };
        p.jacobian = [c](const Vec& u) {
            Mat m(3, 2);
            m << 1, 0, 0, 1, 2.0 * c * u[0], 0;
            return m;
        };
        return p;
    }
    throw std::invalid_argument("io: unknown patch kind '" + kind + "'");
}

inline Box parse_box(const json& j) {
    return Box(parse_vector(j.at("lo")), parse_vector(j.at("hi")));
}

inline SimpleKVector parse_k_vector(const json& j) {
    return SimpleKVector(parse_matrix(j.at("factors")));
}

}  // namespace finsler::io
