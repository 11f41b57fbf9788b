#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace finsler {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Volume of the Euclidean unit ball in dimension k.
inline double unit_ball_volume(int k) {
    return std::pow(kPi, 0.5 * k) / std::tgamma(0.5 * k + 1.0);
}

/// Lexicographically ordered k-subsets of {0,...,n-1}.
inline std::vector<std::vector<int>> combinations(int n, int k) {
    std::vector<std::vector<int>> out;
    if (k < 0 || k > n) return out;
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        out.push_back(idx);
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

inline long binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    long r = 1;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

struct Quadrature1D {
    Vec nodes;
    Vec weights;
};

/// Gauss-Legendre nodes/weights on [-1,1], Newton iteration on P_n.
inline Quadrature1D gauss_legendre(int n) {
    Quadrature1D q;
    q.nodes.resize(n);
    q.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        q.nodes[i] = -x;
        q.nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        q.weights[i] = w;
        q.weights[n - 1 - i] = w;
    }
    return q;
}

/// Map [-1,1] rule onto [a,b].
inline Quadrature1D gauss_legendre(int n, double a, double b) {
    Quadrature1D q = gauss_legendre(n);
    q.nodes = (0.5 * (b - a) * q.nodes.array() + 0.5 * (a + b)).matrix();
    q.weights *= 0.5 * (b - a);
    return q;
}

/// Maximize a scalar function on a bracket by golden-section search.
inline double golden_maximize(const std::function<double(double)>& f, double lo, double hi,
                              double tol, double* arg_out = nullptr) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    double xm = 0.5 * (a + b);
    if (arg_out) *arg_out = xm;
    return f(xm);
}

/// Axis-aligned open box; the common chart domain type.
struct Box {
    Vec lo;
    Vec hi;

    Box() = default;
    Box(Vec l, Vec h) : lo(std::move(l)), hi(std::move(h)) {}

    static Box cube(int n, double half_width) {
        return Box(Vec::Constant(n, -half_width), Vec::Constant(n, half_width));
    }

    bool contains(const Vec& x) const {
        for (int i = 0; i < x.size(); ++i)
            if (x[i] <= lo[i] || x[i] >= hi[i]) return false;
        return true;
    }
};

/// Deterministic RNG helpers used by every sampled test and experiment.
struct Rng {
    std::mt19937_64 gen;

    explicit Rng(std::uint64_t seed) : gen(seed) {}

    double uniform(double a, double b) {
        std::uniform_real_distribution<double> d(a, b);
        return d(gen);
    }
    double normal() {
        std::normal_distribution<double> d(0.0, 1.0);
        return d(gen);
    }
    Vec gaussian_vector(int n) {
        Vec v(n);
        for (int i = 0; i < n; ++i) v[i] = normal();
        return v;
    }
    Vec unit_vector(int n) {
        Vec v = gaussian_vector(n);
        while (v.norm() < 1e-8) v = gaussian_vector(n);
        return v / v.norm();
    }
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace finsler
