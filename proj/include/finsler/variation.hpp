#pragma once

#include "finsler/chart.hpp"
#include "finsler/densities.hpp"

namespace finsler {

/// Oriented immersed k-submanifold patch: a smooth map from a parameter box in
/// R^k into the chart domain. Orientation comes from the parameter order.
struct ImmersedPatch {
    int domain_dim = 0;
    int ambient_dim = 0;
    std::function<Vec(const Vec&)> map;
    std::function<Mat(const Vec&)> jacobian;  // n x k; optional, FD fallback

    Mat jac(const Vec& u) const {
        if (jacobian) return jacobian(u);
        const double h = 1e-5 * std::max(1.0, u.norm());
        Mat j(ambient_dim, domain_dim);
        for (int i = 0; i < domain_dim; ++i) {
            Vec up = u, um = u;
            up[i] += h;
            um[i] -= h;
            j.col(i) = (map(up) - map(um)) / (2.0 * h);
        }
        return j;
    }

    static ImmersedPatch affine(const Vec& origin, const Mat& directions) {
        ImmersedPatch p;
        p.domain_dim = static_cast<int>(directions.cols());
        p.ambient_dim = static_cast<int>(directions.rows());
        p.map = [origin, directions](const Vec& u) { return Vec(origin + directions * u); };
        p.jacobian = [directions](const Vec&) { return directions; };
        return p;
    }
};

/// Compactly supported variation field X on the parameter box.
struct VariationField {
    std::function<Vec(const Vec&)> field;
    std::function<Mat(const Vec&)> jacobian;  // dX/du; optional, FD fallback
    Box support;                              // X == 0 outside this sub-box

    Mat jac(const Vec& u, int ambient_dim) const {
        if (jacobian) return jacobian(u);
        const int k = static_cast<int>(u.size());
        const double h = 1e-5 * std::max(1.0, u.norm());
        Mat j(ambient_dim, k);
        for (int i = 0; i < k; ++i) {
            Vec up = u, um = u;
            up[i] += h;
            um[i] -= h;
            j.col(i) = (field(up) - field(um)) / (2.0 * h);
        }
        return j;
    }
};

/// X(u) = (1 - |(u - u0)/radius|^2)^4_+ * dir: a C^3 bump supporting the
/// localized first-variation probes.
inline VariationField bump_field(const Vec& u0, double radius, const Vec& dir) {
    require(radius > 0.0, "bump_field: radius > 0");
    VariationField x;
    x.field = [u0, radius, dir](const Vec& u) {
        double r2 = ((u - u0) / radius).squaredNorm();
        if (r2 >= 1.0) return Vec(Vec::Zero(dir.size()));
        double b = 1.0 - r2;
        return Vec(b * b * b * b * dir);
    };
    x.jacobian = [u0, radius, dir](const Vec& u) {
        double r2 = ((u - u0) / radius).squaredNorm();
        Mat j = Mat::Zero(dir.size(), u.size());
        if (r2 >= 1.0) return j;
        double b = 1.0 - r2;
        Vec db = -2.0 * (u - u0) / (radius * radius);
        return Mat(4.0 * b * b * b * dir * db.transpose());
    };
    x.support = Box{Vec(u0.array() - radius), Vec(u0.array() + radius)};
    return x;
}

struct VolumeOptions {
    int grid = 64;            // quadrature nodes per parameter dimension
    DensityKind kind = DensityKind::HolmesThompson;
    CubatureOptions cubature;
    bool error_estimate = false;  // re-run at grid/2 and attach the difference
};

struct VolumeValue {
    double value = 0.0;
    double error_estimate = 0.0;
};

namespace detail {

inline double volume_once(const FinslerChart& chart, const ImmersedPatch& patch,
                          const Box& domain, int grid, DensityKind kind,
                          const CubatureOptions& cub) {
    const int k = patch.domain_dim;
    require(k >= 1 && k <= 3, "volume: k in 1..3");
    Quadrature1D gl = gauss_legendre(grid);
    std::vector<int> idx(static_cast<std::size_t>(k), 0);
    double total = 0.0;
    while (true) {
        Vec u(k);
        double w = 1.0;
        for (int d = 0; d < k; ++d) {
            double lo = domain.lo[d], hi = domain.hi[d];
            u[d] = lo + 0.5 * (hi - lo) * (gl.nodes[idx[static_cast<std::size_t>(d)]] + 1.0);
            w *= 0.5 * (hi - lo) * gl.weights[idx[static_cast<std::size_t>(d)]];
        }
        SimpleKVector tangent(patch.jac(u));
        require(tangent.magnitude() > 1e-12, "volume: immersion fails on grid");
        total += w * density(chart.norm_at(patch.map(u)), tangent, kind, cub);
        int d = 0;
        for (; d < k; ++d) {
            if (++idx[static_cast<std::size_t>(d)] < grid) break;
            idx[static_cast<std::size_t>(d)] = 0;
        }
        if (d == k) break;
    }
    return total;
}

inline ImmersedPatch deformed(const ImmersedPatch& patch, const VariationField& x, double s) {
    ImmersedPatch d = patch;
    auto base_map = patch.map;
    auto base_jac = [patch](const Vec& u) { return patch.jac(u); };
    int n = patch.ambient_dim;
    d.map = [base_map, &x, s](const Vec& u) { return Vec(base_map(u) + s * x.field(u)); };
    d.jacobian = [base_jac, &x, s, n](const Vec& u) {
        return Mat(base_jac(u) + s * x.jac(u, n));
    };
    return d;
}

}  // namespace detail

/// Holmes-Thompson (or Busemann-Hausdorff) k-volume of the patch over the
/// parameter box, by tensor-product Gauss-Legendre quadrature of the density.
inline VolumeValue ht_volume_full(const FinslerChart& chart, const ImmersedPatch& patch,
                                  const Box& domain, const VolumeOptions& opt = {}) {
    VolumeValue out;
    out.value = detail::volume_once(chart, patch, domain, opt.grid, opt.kind, opt.cubature);
    if (opt.error_estimate) {
        double coarse = detail::volume_once(chart, patch, domain, std::max(4, opt.grid / 2),
                                            opt.kind, opt.cubature);
        out.error_estimate = std::abs(out.value - coarse);
    }
    return out;
}

inline double ht_volume(const FinslerChart& chart, const ImmersedPatch& patch,
                        const Box& domain, const VolumeOptions& opt = {}) {
    return ht_volume_full(chart, patch, domain, opt).value;
}

/// First variation dVol(X) by central differences in the deformation
/// parameter with one Richardson step; integration restricted to the support
/// of X (the difference vanishes identically outside).
inline double first_variation(const FinslerChart& chart, const ImmersedPatch& patch,
                              const VariationField& x, const Box& domain, double s_step = 1e-4,
                              const VolumeOptions& opt = {}) {
    Box box = domain;
    for (int d = 0; d < patch.domain_dim; ++d) {
        box.lo[d] = std::max(domain.lo[d], x.support.lo[d]);
        box.hi[d] = std::min(domain.hi[d], x.support.hi[d]);
        require(box.lo[d] < box.hi[d], "first_variation: X supported off the domain");
    }
    auto diff = [&](double s) {
        double plus = detail::volume_once(chart, detail::deformed(patch, x, s), box, opt.grid,
                                          opt.kind, opt.cubature);
        double minus = detail::volume_once(chart, detail::deformed(patch, x, -s), box, opt.grid,
                                           opt.kind, opt.cubature);
        return (plus - minus) / (2.0 * s);
    };
    double coarse = diff(s_step);
    double fine = diff(0.5 * s_step);
    return (4.0 * fine - coarse) / 3.0;
}

/// Busemann-Hausdorff first variation, for contrast experiments.
inline double hausdorff_comparison(const FinslerChart& chart, const ImmersedPatch& patch,
                                   const VariationField& x, const Box& domain,
                                   double s_step = 1e-4, VolumeOptions opt = {}) {
    opt.kind = DensityKind::BusemannHausdorff;
    return first_variation(chart, patch, x, domain, s_step, opt);
}

struct CurvatureCovector {
    Vec base_point;
    Vec h;  // ambient covector; h(u) > 0 means volume grows when moving along u
};

/// Mean-curvature covector at parameter point u0 via localized bump probes:
/// h_i = dVol(bump e_i) / int bump * phi, Richardson-extrapolated over two
/// bump radii (error in the radius is O(radius^2)).
inline CurvatureCovector mean_curvature_covector(const FinslerChart& chart,
                                                 const ImmersedPatch& patch, const Vec& u0,
                                                 double radius, const Box& domain,
                                                 const VolumeOptions& opt = {}) {
    const int n = patch.ambient_dim;
    auto h_at_radius = [&](double r) {
        // Weight int bump * phi over the bump support.
        Box box{Vec(u0.array() - r), Vec(u0.array() + r)};
        for (int d = 0; d < patch.domain_dim; ++d) {
            box.lo[d] = std::max(domain.lo[d], box.lo[d]);
            box.hi[d] = std::min(domain.hi[d], box.hi[d]);
        }
        VariationField probe = bump_field(u0, r, Vec(Vec::Unit(n, 0)));
        Quadrature1D gl = gauss_legendre(opt.grid);
        double weight = 0.0;
        std::vector<int> idx(static_cast<std::size_t>(patch.domain_dim), 0);
        while (true) {
            Vec u(patch.domain_dim);
            double w = 1.0;
            for (int d = 0; d < patch.domain_dim; ++d) {
                double lo = box.lo[d], hi = box.hi[d];
                u[d] = lo + 0.5 * (hi - lo) * (gl.nodes[idx[static_cast<std::size_t>(d)]] + 1.0);
                w *= 0.5 * (hi - lo) * gl.weights[idx[static_cast<std::size_t>(d)]];
            }
            double r2 = ((u - u0) / r).squaredNorm();
            if (r2 < 1.0) {
                double b = 1.0 - r2;
                weight += w * b * b * b * b *
                          density(chart.norm_at(patch.map(u)), SimpleKVector(patch.jac(u)),
                                  opt.kind, opt.cubature);
            }
            int d = 0;
            for (; d < patch.domain_dim; ++d) {
                if (++idx[static_cast<std::size_t>(d)] < opt.grid) break;
                idx[static_cast<std::size_t>(d)] = 0;
            }
            if (d == patch.domain_dim) break;
        }
        Vec h(n);
        for (int i = 0; i < n; ++i) {
            VariationField x = bump_field(u0, r, Vec(Vec::Unit(n, i)));
            h[i] = first_variation(chart, patch, x, domain, 1e-4 * r, opt) / weight;
        }
        return h;
    };
    Vec coarse = h_at_radius(radius);
    Vec fine = h_at_radius(0.5 * radius);
    return CurvatureCovector{patch.map(u0), (4.0 * fine - coarse) / 3.0};
}

/// Validation-only dTheta_k route for the mean curvature (k = 1 any n, or
/// k = 2, n = 3): h(u) = d(sigma^* Theta_k)(u, a_1, ..., a_k) where
/// sigma^* Theta_k is the x-dependent Busemann form of the section's plane.
/// `section` maps x to a k-frame (columns) spanning sigma(x).
inline Vec mean_curvature_dtheta(const FinslerChart& chart,
                                 const std::function<Mat(const Vec&)>& section, const Vec& x,
                                 double fd_step = 1e-4, const CubatureOptions& cub = {}) {
    const int n = chart.dim();
    Mat frame = section(x);
    const int k = static_cast<int>(frame.cols());
    require(k == 1 || (k == 2 && n == 3), "mean_curvature_dtheta: k = 1 or (k, n) = (2, 3)");
    auto beta = [&](const Vec& y) {
        return busemann_form_covector(chart.norm_at(y), SimpleKVector(section(y)), cub)
            .components();
    };
    if (k == 1) {
        // h(u) = d(beta)(u, v) = u(beta(v)) - v(beta(u)), beta a 1-form field.
        Mat dbeta(n, n);  // dbeta(i, j) = d beta_i / d x_j
        for (int j = 0; j < n; ++j) {
            Vec xp = x, xm = x;
            xp[j] += fd_step;
            xm[j] -= fd_step;
            dbeta.col(j) = (beta(xp) - beta(xm)) / (2.0 * fd_step);
        }
        Vec v = frame.col(0);
        Vec h(n);
        // d(beta)(e_i, v) = e_i(beta(v)) - v(beta(e_i)).
        for (int i = 0; i < n; ++i) h[i] = v.dot(dbeta.col(i)) - (dbeta.row(i) * v)[0];
        return h;
    }
    // k = 2, n = 3: beta = c1 dx12 + c2 dx13 + c3 dx23 (lexicographic), so
    // dbeta = (d3 c1 - d2 c2 + d1 c3) dx123 and h(u) = dbeta * det[u, a1, a2].
    Mat dc(3, 3);  // dc(i, j) = d c_i / d x_j
    for (int j = 0; j < 3; ++j) {
        Vec xp = x, xm = x;
        xp[j] += fd_step;
        xm[j] -= fd_step;
        dc.col(j) = (beta(xp) - beta(xm)) / (2.0 * fd_step);
    }
    double scalar = dc(0, 2) - dc(1, 1) + dc(2, 0);
    Vec h(3);
    Mat det_m(3, 3);
    det_m.col(1) = frame.col(0);
    det_m.col(2) = frame.col(1);
    for (int i = 0; i < 3; ++i) {
        det_m.col(0) = Vec::Unit(3, i);
        h[i] = scalar * det_m.determinant();
    }
    return h;
}

struct FiberIdentityReport {
    double lhs = 0.0;        // Busemann form of the section's plane on the test 2-vector
    double rhs = 0.0;        // fiber integral of omega_1 ^ d(omega_1), scaled
    double max_gap = 0.0;    // worst |lhs - rhs| over all tested 2-vectors
    int fiber_nodes = 0;
};

/// Numerical check of the fiber-integration identity (k = 2, n = 3): the
/// push-forward of omega_1 ^ d(omega_1) over the fiber circle, times
/// (-1)^{k(k+1)/2} / (k! eps_k) = -1/(2 pi), equals the Busemann form of the
/// plane. `q` holds an oriented basis of the plane in its columns.
inline FiberIdentityReport fiber_identity_check(const FinslerChart& chart, const Vec& x,
                                                const Mat& q, int test_pairs = 5,
                                                std::uint64_t seed = 1, int fiber_nodes = 256,
                                                const CubatureOptions& cub = {}) {
    require(chart.dim() == 3 && q.rows() == 3 && q.cols() == 2, "fiber_identity: k=2, n=3");
    NormPtr norm = chart.norm_at(x);
    SimpleKVector a{Mat(q)};
    KCovector beta = busemann_form_covector(norm, a, cub);

    // Fiber circle: v(t) = w(t)/F(x, w(t)), w = cos t q1 + sin t q2.
    auto rhs_pair = [&](const Vec& b1, const Vec& b2) {
        double acc = 0.0;
        for (int i = 0; i < fiber_nodes; ++i) {
            double t = 2.0 * kPi * i / fiber_nodes;
            Vec w = std::cos(t) * q.col(0) + std::sin(t) * q.col(1);
            Vec wd = -std::sin(t) * q.col(0) + std::cos(t) * q.col(1);
            double f = chart.value(x, w);
            Vec grad_f = chart.energy_grad_v(x, w) / f;  // dF/dv, 0-homogeneous
            Vec v = w / f;
            Vec vdot = wd / f - (grad_f.dot(wd) / (f * f)) * w;
            TangentBundlePoint p{x, v};
            double fval = chart.value(x, v);  // = 1
            Vec grad_fx = chart.energy_grad_x(x, v) / fval;
            // Lifts tangent to the unit-sphere bundle of the constant section.
            Vec dv1 = -(grad_fx.dot(b1)) * v;
            Vec dv2 = -(grad_fx.dot(b2)) * v;
            double om1 = hilbert_one_form(chart, p, b1, dv1);
            double om2 = hilbert_one_form(chart, p, b2, dv2);
            Vec zero = Vec::Zero(3);
            double integrand = om1 * d_hilbert_one_form(chart, p, b2, dv2, zero, vdot) -
                               om2 * d_hilbert_one_form(chart, p, b1, dv1, zero, vdot);
            acc += integrand * 2.0 * kPi / fiber_nodes;
        }
        return -acc / (2.0 * kPi);
    };

    FiberIdentityReport rep;
    rep.fiber_nodes = fiber_nodes;
    rep.lhs = pair(beta, a);
    rep.rhs = rhs_pair(q.col(0), q.col(1));
    rep.max_gap = std::abs(rep.lhs - rep.rhs);
    Rng rng(seed);
    for (int s = 0; s < test_pairs; ++s) {
        Vec b1 = rng.gaussian_vector(3);
        Vec b2 = rng.gaussian_vector(3);
        Mat bf(3, 2);
        bf.col(0) = b1;
        bf.col(1) = b2;
        double lhs = pair(beta, SimpleKVector(bf));
        rep.max_gap = std::max(rep.max_gap, std::abs(lhs - rhs_pair(b1, b2)));
    }
    return rep;
}

struct MinimalityReport {
    double max_ratio = 0.0;       // max |dVol(X)| / ||X|| over the trials
    double max_h_norm = 0.0;      // max |h| over probed grid points
    int trials = 0;
    std::vector<double> variations;
};

/// Main-theorem experiment: for a totally geodesic patch of the chart, random
/// compactly supported variations must not change the HT volume to first
/// order.
inline MinimalityReport totally_geodesic_minimality_experiment(
    const FinslerChart& chart, const ImmersedPatch& patch, const Box& domain, int trials,
    std::uint64_t seed, const VolumeOptions& opt = {}, int h_probes = 0,
    double h_radius = 0.25) {
    MinimalityReport rep;
    rep.trials = trials;
    Rng rng(seed);
    const int k = patch.domain_dim;
    for (int s = 0; s < trials; ++s) {
        Vec span = domain.hi - domain.lo;
        double radius = rng.uniform(0.15, 0.3) * span.minCoeff();
        Vec u0(k);
        for (int d = 0; d < k; ++d)
            u0[d] = rng.uniform(domain.lo[d] + radius, domain.hi[d] - radius);
        Vec dir = rng.unit_vector(patch.ambient_dim);
        VariationField x = bump_field(u0, radius, dir);
        double dv = first_variation(chart, patch, x, domain, 1e-3 * radius, opt);
        rep.variations.push_back(dv);
        rep.max_ratio = std::max(rep.max_ratio, std::abs(dv));  // ||X||_sup = 1
    }
    for (int p = 0; p < h_probes; ++p) {
        Vec u0(k);
        for (int d = 0; d < k; ++d)
            u0[d] = rng.uniform(domain.lo[d] + h_radius, domain.hi[d] - h_radius);
        auto h = mean_curvature_covector(chart, patch, u0, h_radius, domain, opt);
        rep.max_h_norm = std::max(rep.max_h_norm, h.h.norm());
    }
    return rep;
}

}  // namespace finsler
