// finsler: CLI for Finsler/Minkowski geometry computations and experiments.
#include "finsler/io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace finsler;
using finsler::io::json;

namespace {

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    return json::parse(in);
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

struct CommonArgs {
    std::string config;
    std::string out_dir = ".";
    std::int64_t seed = -1;  // -1: use the config's seed

    void attach(CLI::App* app) {
        app->add_option("--config", config, "JSON config file")->required();
        app->add_option("--out-dir", out_dir, "output directory");
        app->add_option("--seed", seed, "override the config RNG seed");
    }

    json load() const {
        json cfg = load_config(config);
        if (seed >= 0) cfg["seed"] = seed;
        return cfg;
    }
};

std::uint64_t require_seed(const json& cfg) {
    if (!cfg.contains("seed"))
        throw std::invalid_argument("config must carry a 'seed' for reproducibility");
    return cfg.at("seed").get<std::uint64_t>();
}

// ---------------------------------------------------------------------------

int run_density(const CommonArgs& args) {
    json cfg = args.load();
    NormPtr norm = io::parse_norm(cfg.at("norm"));
    SimpleKVector a = io::parse_k_vector(cfg.at("k_vector"));
    json report;
    report["inputs"] = cfg;
    report["outputs"]["ht_density"] = ht_density(norm, a);
    report["outputs"]["busemann_hausdorff_density"] = busemann_hausdorff_density(norm, a);
    KCovector beta = busemann_form_covector(norm, a);
    report["outputs"]["busemann_form"] = io::dump_vector(beta.components());
    report["outputs"]["beta_of_a"] = pair(beta, a);
    bool pass = true;
    if (cfg.contains("calibrate")) {
        const json& c = cfg.at("calibrate");
        auto rep = local_calibration_check(norm, a, c.value("radius", 0.2),
                                           c.value("samples", 200), require_seed(cfg));
        double tol = c.value("tolerance", 1e-6);
        report["outputs"]["calibration"] = {{"max_violation", rep.max_violation},
                                            {"base_equality_gap", rep.base_equality_gap},
                                            {"samples", rep.samples}};
        report["tolerances"]["calibration"] = tol;
        pass = rep.max_violation <= tol && rep.base_equality_gap <= tol;
    }
    report["pass"] = pass;
    write_json(std::filesystem::path(args.out_dir) / "density_report.json", report);
    std::cout << report.dump(2) << "\n";
    return pass ? 0 : 1;
}

int run_geodesic(const CommonArgs& args) {
    json cfg = args.load();
    ChartPtr chart = io::parse_chart(cfg.at("chart"));
    Vec x0 = io::parse_vector(cfg.at("x0"));
    Vec v0 = io::parse_vector(cfg.at("v0"));
    GeodesicOptions opt;
    opt.step = cfg.value("step", 1e-3);
    auto geo = shoot_geodesic(*chart, x0, v0, cfg.at("length").get<double>(), opt);

    std::filesystem::path csv_path = std::filesystem::path(args.out_dir) / "geodesic.csv";
    std::ofstream csv(csv_path);
    csv << "t";
    for (long i = 0; i < x0.size(); ++i) csv << ",x" << i;
    for (long i = 0; i < x0.size(); ++i) csv << ",v" << i;
    csv << "\n";
    csv.precision(17);
    for (std::size_t i = 0; i < geo.t.size(); ++i) {
        csv << geo.t[i];
        for (long d = 0; d < x0.size(); ++d) csv << "," << geo.x[i][d];
        for (long d = 0; d < x0.size(); ++d) csv << "," << geo.v[i][d];
        csv << "\n";
    }

    json report;
    report["inputs"] = cfg;
    report["outputs"]["samples"] = geo.t.size();
    report["outputs"]["endpoint"] = io::dump_vector(geo.x.back());
    report["outputs"]["el_residual"] = euler_lagrange_residual(*chart, geo);
    report["outputs"]["aborted"] = geo.aborted;
    report["outputs"]["left_domain"] = geo.left_domain;
    report["pass"] = !geo.aborted;
    write_json(std::filesystem::path(args.out_dir) / "geodesic_report.json", report);
    std::cout << report.dump(2) << "\n";
    return geo.aborted ? 1 : 0;
}

std::function<Vec(double)> parse_curve(const json& j, double& t0, double& t1) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "segment") {
        Vec from = io::parse_vector(j.at("from"));
        Vec to = io::parse_vector(j.at("to"));
        t0 = 0.0;
        t1 = 1.0;
        return [from, to](double t) { return Vec(from + t * (to - from)); };
    }
    if (kind == "ellipse") {
        double a = j.at("a").get<double>();
        double b = j.at("b").get<double>();
        t0 = 0.0;
        t1 = 2.0 * kPi;
        return [a, b](double t) {
            Vec x(2);
            x << a * std::cos(t), b * std::sin(t);
            return x;
        };
    }
    throw std::invalid_argument("unknown curve kind '" + kind + "'");
}

int run_crofton(const CommonArgs& args) {
    json cfg = args.load();
    auto chart = std::make_shared<CroftonChart>(cfg.value("dim", 2),
                                                io::parse_measure(cfg.at("measure")));
    json report;
    report["inputs"] = cfg;
    bool pass = true;
    if (cfg.contains("curve")) {
        double t0 = 0.0, t1 = 1.0;
        auto curve = parse_curve(cfg.at("curve"), t0, t1);
        auto rep = crofton_length_identity_check(*chart, curve, t0, t1,
                                                 cfg.value("samples", 100000),
                                                 require_seed(cfg));
        double gap = std::abs(rep.mc_estimate - rep.curve_length);
        report["outputs"]["length"] = {{"curve_length", rep.curve_length},
                                       {"mc_estimate", rep.mc_estimate},
                                       {"mc_std_error", rep.mc_std_error},
                                       {"gap", gap}};
        report["tolerances"]["length_gap"] = 3.0 * rep.mc_std_error;
        pass = pass && gap <= 3.0 * rep.mc_std_error;
    }
    if (cfg.contains("line_check")) {
        const json& l = cfg.at("line_check");
        double tol = l.value("tolerance", 1e-5);
        double dev = line_geodesic_deviation(*chart, io::parse_vector(l.at("x0")),
                                             io::parse_vector(l.at("dir")),
                                             l.value("length", 1.0), {.step = 1e-3});
        report["outputs"]["line_deviation"] = dev;
        report["tolerances"]["line_deviation"] = tol;
        pass = pass && dev <= tol;
    }
    report["pass"] = pass;
    write_json(std::filesystem::path(args.out_dir) / "crofton_report.json", report);
    std::cout << report.dump(2) << "\n";
    return pass ? 0 : 1;
}

int run_variation(const CommonArgs& args) {
    json cfg = args.load();
    ChartPtr chart = io::parse_chart(cfg.at("chart"));
    ImmersedPatch patch = io::parse_patch(cfg.at("patch"));
    Box domain = io::parse_box(cfg.at("domain"));
    Vec u0 = io::parse_vector(cfg.at("point"));
    VolumeOptions opt;
    opt.grid = cfg.value("grid", 32);
    auto h = mean_curvature_covector(*chart, patch, u0, cfg.value("radius", 0.3), domain, opt);
    json report;
    report["inputs"] = cfg;
    report["outputs"]["base_point"] = io::dump_vector(h.base_point);
    report["outputs"]["h"] = io::dump_vector(h.h);
    report["outputs"]["h_norm"] = h.h.norm();
    report["pass"] = true;
    write_json(std::filesystem::path(args.out_dir) / "variation_report.json", report);
    std::cout << report.dump(2) << "\n";
    return 0;
}

int run_cartan(const CommonArgs& args) {
    json cfg = args.load();
    ChartPtr chart = io::parse_chart(cfg.at("chart"));
    require(chart->dim() == 2, "cartan: surface charts only");
    int samples = cfg.value("samples", 100);
    double half = cfg.value("box_halfwidth", 1.0);
    Rng rng(require_seed(cfg));

    std::filesystem::path csv_path = std::filesystem::path(args.out_dir) / "cartan.csv";
    std::ofstream csv(csv_path);
    csv << "x1,x2,theta,I,J,K,res1,res2,res3\n";
    csv.precision(17);
    double max_res = 0.0, max_abs_i = 0.0;
    for (int s = 0; s < samples; ++s) {
        Vec x(2);
        x << rng.uniform(-half, half), rng.uniform(-half, half);
        double th = rng.uniform(0.0, 2.0 * kPi);
        auto inv = invariants_IJK(*chart, x, th);
        csv << x[0] << "," << x[1] << "," << th << "," << inv.I << "," << inv.J << ","
            << inv.K << "," << inv.residuals[0] << "," << inv.residuals[1] << ","
            << inv.residuals[2] << "\n";
        max_res = std::max(max_res, inv.residuals.maxCoeff());
        max_abs_i = std::max(max_abs_i, std::abs(inv.I));
    }
    double tol = cfg.value("residual_tolerance", 1e-4);
    json report;
    report["inputs"] = cfg;
    report["outputs"]["max_residual"] = max_res;
    report["outputs"]["max_abs_I"] = max_abs_i;
    report["tolerances"]["residual"] = tol;
    report["pass"] = max_res <= tol;
    write_json(std::filesystem::path(args.out_dir) / "cartan_report.json", report);
    std::cout << report.dump(2) << "\n";
    return max_res <= tol ? 0 : 1;
}

// ---------------------------------------------------------------------------

json experiment_density_calibration(const json& cfg) {
    std::uint64_t seed = require_seed(cfg);
    int norms = cfg.value("norms", 20);
    int samples = cfg.value("samples", 200);
    double radius = cfg.value("radius", 0.2);
    double tol = cfg.value("tolerance", 1e-6);
    Rng rng(seed);
    double worst_violation = -1e300, worst_gap = 0.0;
    for (int t = 0; t < norms; ++t) {
        Mat m(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m(i, j) = rng.normal();
        Mat sym = 0.1 * (m + m.transpose());
        Mat a_mat = sym * sym + Mat::Identity(3, 3);
        Vec b = 0.3 * rng.unit_vector(3) * rng.uniform(0.2, 1.0);
        auto norm = std::make_shared<RandersNorm>(a_mat, b);
        Mat f(3, 2);
        f.col(0) = rng.gaussian_vector(3);
        f.col(1) = rng.gaussian_vector(3);
        auto rep = local_calibration_check(norm, SimpleKVector(f), radius, samples,
                                           seed + 1000 + static_cast<std::uint64_t>(t));
        worst_violation = std::max(worst_violation, rep.max_violation);
        worst_gap = std::max(worst_gap, rep.base_equality_gap);
    }
    json out;
    out["outputs"] = {{"max_violation", worst_violation}, {"max_base_gap", worst_gap}};
    out["tolerances"] = {{"violation", tol}, {"base_gap", tol}};
    out["pass"] = worst_violation <= tol && worst_gap <= tol;
    return out;
}

json experiment_main_theorem(const json& cfg) {
    std::uint64_t seed = require_seed(cfg);
    MeasurePtr measure = cfg.contains("measure")
                             ? io::parse_measure(cfg.at("measure"))
                             : std::make_shared<GaussianBumpMeasure>(1.0, 0.5);
    auto chart = std::make_shared<CroftonChart>(
        3, measure, CroftonOptions{.polar_nodes = 8, .azimuth_nodes = 16, .circle_nodes = 32});
    Mat dirs(3, 2);
    dirs << 1, 0, 0, 1, 0, 0;
    auto plane = ImmersedPatch::affine(Vec(Vec::Zero(3)), dirs);
    Box dom(Vec(Vec::Constant(2, -1.0)), Vec(Vec::Constant(2, 1.0)));
    VolumeOptions opt;
    opt.grid = cfg.value("grid", 24);
    opt.cubature.circle_nodes = 32;
    int trials = cfg.value("trials", 20);
    double tol = cfg.value("tolerance", 1e-4);
    auto rep = totally_geodesic_minimality_experiment(*chart, plane, dom, trials, seed, opt);

    // Discriminative-power control: a bent patch must show first-order change.
    ImmersedPatch bent;
    bent.domain_dim = 2;
    bent.ambient_dim = 3;
    bent.map = [](const Vec& u) {
        Vec x(3);
        x << u[0], u[1], 0.4 * u[0] * u[0];
        return x;
    };
    Vec u0 = Vec::Zero(2);
    Vec ez = Vec::Unit(3, 2);
    double bent_dv = first_variation(*chart, bent, bump_field(u0, 0.45, ez), dom, 1e-4, opt);

    json out;
    out["outputs"] = {{"max_first_variation", rep.max_ratio},
                      {"variations", rep.variations},
                      {"bent_patch_variation", bent_dv},
                      {"trials", trials}};
    out["tolerances"] = {{"flat", tol}, {"bent_min", 1e-2}};
    out["pass"] = rep.max_ratio <= tol && std::abs(bent_dv) > 1e-2;
    return out;
}

json experiment_fiber_identity(const json& cfg) {
    std::uint64_t seed = require_seed(cfg);
    ChartPtr chart = cfg.contains("chart")
                         ? io::parse_chart(cfg.at("chart"))
                         : ChartPtr(std::make_shared<ConstantChart>(
                               std::make_shared<RandersNorm>(
                                   Mat::Identity(3, 3),
                                   (Vec(3) << 0.3, 0.1, -0.05).finished()),
                               3));
    int points = cfg.value("points", 10);
    double tol = cfg.value("tolerance", 1e-4);
    Rng rng(seed);
    double worst = 0.0;
    for (int p = 0; p < points; ++p) {
        Vec x = 0.5 * rng.gaussian_vector(3);
        Mat q(3, 2);
        q.col(0) = rng.unit_vector(3);
        Vec z = rng.gaussian_vector(3);
        q.col(1) = (z - z.dot(q.col(0)) * q.col(0)).normalized();
        auto rep = fiber_identity_check(*chart, x, q, 2, seed + static_cast<std::uint64_t>(p));
        worst = std::max(worst, rep.max_gap);
    }
    json out;
    out["outputs"] = {{"max_gap", worst}, {"points", points}};
    out["tolerances"] = {{"gap", tol}};
    out["pass"] = worst <= tol;
    return out;
}

json experiment_crofton_length(const json& cfg) {
    std::uint64_t seed = require_seed(cfg);
    MeasurePtr measure = cfg.contains("measure") ? io::parse_measure(cfg.at("measure"))
                                                 : std::make_shared<ConstantMeasure>();
    CroftonChart chart(cfg.value("dim", 2), measure);
    double t0 = 0.0, t1 = 2.0 * kPi;
    std::function<Vec(double)> curve;
    if (cfg.contains("curve")) {
        curve = parse_curve(cfg.at("curve"), t0, t1);
    } else {
        curve = [](double t) {
            Vec x(2);
            x << std::cos(t), 0.8 * std::sin(t);
            return x;
        };
    }
    auto rep = crofton_length_identity_check(chart, curve, t0, t1,
                                             cfg.value("samples", 1000000), seed);
    double gap = std::abs(rep.mc_estimate - rep.curve_length);
    json out;
    out["outputs"] = {{"curve_length", rep.curve_length},
                      {"mc_estimate", rep.mc_estimate},
                      {"mc_std_error", rep.mc_std_error},
                      {"gap", gap}};
    out["tolerances"] = {{"gap", 3.0 * rep.mc_std_error}};
    out["pass"] = gap <= 3.0 * rep.mc_std_error;
    return out;
}

int run_experiment(const CommonArgs& args) {
    json cfg = args.load();
    const std::string name = cfg.at("experiment").get<std::string>();
    json out;
    if (name == "density-calibration") {
        out = experiment_density_calibration(cfg);
    } else if (name == "main-theorem") {
        out = experiment_main_theorem(cfg);
    } else if (name == "fiber-identity") {
        out = experiment_fiber_identity(cfg);
    } else if (name == "crofton-length") {
        out = experiment_crofton_length(cfg);
    } else {
        throw std::invalid_argument("unknown experiment '" + name + "'");
    }
    out["inputs"] = cfg;
    write_json(std::filesystem::path(args.out_dir) / (name + "_report.json"), out);
    std::cout << out.dump(2) << "\n";
    return out.at("pass").get<bool>() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finsler/Minkowski geometry computations and experiments"};
    app.require_subcommand(1);

    CommonArgs density_args, geodesic_args, crofton_args, variation_args, cartan_args,
        experiment_args;
    density_args.attach(app.add_subcommand("density", "densities, Busemann form, calibration"));
    geodesic_args.attach(app.add_subcommand("geodesic", "shoot a geodesic, write CSV"));
    crofton_args.attach(app.add_subcommand("crofton", "Crofton length and line checks"));
    variation_args.attach(app.add_subcommand("variation", "mean-curvature covector"));
    cartan_args.attach(app.add_subcommand("cartan", "surface invariants I, J, K"));
    experiment_args.attach(app.add_subcommand("experiment", "run a named experiment"));

    CLI11_PARSE(app, argc, argv);
    try {
        if (app.got_subcommand("density")) return run_density(density_args);
        if (app.got_subcommand("geodesic")) return run_geodesic(geodesic_args);
        if (app.got_subcommand("crofton")) return run_crofton(crofton_args);
        if (app.got_subcommand("variation")) return run_variation(variation_args);
        if (app.got_subcommand("cartan")) return run_cartan(cartan_args);
        if (app.got_subcommand("experiment")) return run_experiment(experiment_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
