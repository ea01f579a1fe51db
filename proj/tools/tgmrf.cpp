// Command-line front end: builds lattice models, factorizes them into the
// telescoping shell chain, samples fields, runs estimation and image
// denoising, verifies the continuous-index formulas, and emits telescoping
// surfaces. All outputs are deterministic functions of the inputs and seed.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tgmrf/continuous.hpp"
#include "tgmrf/estimation.hpp"
#include "tgmrf/geometry.hpp"
#include "tgmrf/io.hpp"
#include "tgmrf/sampling.hpp"
#include "tgmrf/shells.hpp"
#include "tgmrf/telescoping.hpp"

namespace fs = std::filesystem;
using namespace tgmrf;

namespace {

struct Options {
    fs::path out = ".";
    std::uint64_t seed = 0;

    fs::path config;
    fs::path obs_path;
    fs::path in_path;
    fs::path ref_path;
    fs::path out_file;
    fs::path domain_path;
    std::string prefix = "estimate_";
    std::string format = "csv";
    std::string kind = "radial";
    int rows = 0;
    int cols = 0;
    int count = 1;
    int n_lambda = 8;
    int n_samples = 256;
    double noise_var = 1.0;
    double c1 = 0.0;
    double c2 = 0.0;
};

void ensure_out_dir(const fs::path& dir) {
    if (!dir.empty()) fs::create_directories(dir);
}

std::string fmt(double v) { return io::format_double(v); }

// ---------------------------------------------------------------- shells --

int run_shells(const Options& opt) {
    const LatticeSpec spec(opt.rows, opt.cols);
    const auto dec = shells(spec);
    ensure_out_dir(opt.out);
    std::ofstream out(opt.out / "shells.csv");
    if (!out) throw std::runtime_error("cannot write shells.csv");
    out << "shell_index,order_in_shell,row,col\n";
    for (int k = 0; k <= dec.tau; ++k) {
        const auto& sh = dec.shells[static_cast<std::size_t>(k)];
        for (std::size_t t = 0; t < sh.size(); ++t)
            out << k << ',' << t << ',' << sh[t].row << ',' << sh[t].col << '\n';
    }
    return 0;
}

// ----------------------------------------------------------------- build --

int run_build(const Options& opt) {
    const PrecisionSystem sys = load_model(parse_model_config(opt.config));
    ensure_out_dir(opt.out);
    io::write_csv(opt.out / "A.csv", sys.A);
    io::write_csv(opt.out / "A_b.csv", sys.A_b);
    io::write_csv(opt.out / "sigma_b.csv", sys.boundary_cov);
    const SpdReport rep = validate_spd(sys);
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("spd", rep.ok ? "pass" : "fail");
    kv.emplace_back("min_pivot", fmt(rep.min_pivot));
    if (!rep.ok) kv.emplace_back("first_bad_pivot_row", std::to_string(rep.first_bad_index));
    io::write_report(opt.out / "spd_report.txt", kv);
    if (!rep.ok)
        std::cerr << "warning: interior operator is not positive definite (pivot row "
                  << rep.first_bad_index << ")\n";
    return 0;
}

// ------------------------------------------------------------- factorize --

int run_factorize(const Options& opt) {
    const PrecisionSystem sys = load_model(parse_model_config(opt.config));
    const auto dec = shells(sys.spec);
    const auto model = factorize(permute_system(sys, dec), sys.boundary_cov);
    ensure_out_dir(opt.out);
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("tau", std::to_string(model.tau));
    kv.emplace_back("boundary_size", std::to_string(model.sizes[0]));
    for (int k = 1; k <= model.tau; ++k) {
        io::write_csv(opt.out / ("F_" + std::to_string(k) + ".csv"),
                      model.F[static_cast<std::size_t>(k - 1)]);
        io::write_csv(opt.out / ("Q_" + std::to_string(k) + ".csv"),
                      model.Q[static_cast<std::size_t>(k - 1)]);
        kv.emplace_back("stage_" + std::to_string(k) + "_size",
                        std::to_string(model.sizes[static_cast<std::size_t>(k)]));
    }
    io::write_report(opt.out / "manifest.txt", kv);
    return 0;
}

// ---------------------------------------------------------------- sample --

int run_sample(const Options& opt) {
    const PrecisionSystem sys = load_model(parse_model_config(opt.config));
    const auto dec = shells(sys.spec);
    const auto model = factorize(permute_system(sys, dec), sys.boundary_cov);
    if (opt.format != "csv" && opt.format != "pgm")
        throw std::invalid_argument("sample: --format must be csv or pgm");
    ensure_out_dir(opt.out);
    for (int i = 0; i < opt.count; ++i) {
        const std::uint64_t seed = opt.seed + static_cast<std::uint64_t>(i);
        const FieldSample s = sample_field(model, dec, seed);
        char name[32];
        std::snprintf(name, sizeof(name), "sample_%06d", i);
        if (opt.format == "csv") {
            io::write_csv(opt.out / (std::string(name) + ".csv"), s.interior);
        } else {
            const double lo = s.interior.minCoeff();
            const double hi = s.interior.maxCoeff();
            const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
            Matrix img = (s.interior.array() - lo) * scale;
            if (hi == lo) img.setConstant(128.0);
            io::write_pgm(opt.out / (std::string(name) + ".pgm"), img);
            io::write_report(opt.out / (std::string(name) + ".txt"),
                             {{"seed", std::to_string(seed)},
                              {"min", fmt(lo)},
                              {"max", fmt(hi)},
                              {"scale", fmt(scale)}});
        }
    }
    return 0;
}

// -------------------------------------------------------------- estimate --

ObservationModel read_observations(const fs::path& path, const LatticeSpec& spec, Vector& y) {
    const Matrix table = io::read_csv(path);
    if (table.cols() != 5)
        throw std::invalid_argument("observation csv needs columns row,col,gain,variance,value");
    ObservationModel obs = ObservationModel::none(spec);
    y = Vector::Zero(spec.interior_count());
    for (Eigen::Index r = 0; r < table.rows(); ++r) {
        const Node p{static_cast<int>(table(r, 0)), static_cast<int>(table(r, 1))};
        if (!spec.is_interior(p))
            throw std::invalid_argument("observation at (" + std::to_string(p.row) + "," +
                                        std::to_string(p.col) + ") is outside the interior");
        const int idx = spec.interior_index(p);
        obs.observed[static_cast<std::size_t>(idx)] = 1;
        obs.gain[idx] = table(r, 2);
        obs.noise_var[idx] = table(r, 3);
        y[idx] = table(r, 4);
    }
    return obs;
}

int run_estimate(const Options& opt) {
    const PrecisionSystem sys = load_model(parse_model_config(opt.config));
    const auto dec = shells(sys.spec);
    const auto model = factorize(permute_system(sys, dec), sys.boundary_cov);
    Vector y;
    const ObservationModel obs = read_observations(opt.obs_path, sys.spec, y);
    auto res = kalman_filter(model, dec, obs, y);
    rts_smoother(model, dec, res);
    ensure_out_dir(opt.out);
    io::write_csv(opt.out / (opt.prefix + "mean.csv"), res.smoothed_interior);
    io::write_csv(opt.out / (opt.prefix + "variance.csv"), res.posterior_variance);
    int n_obs = 0;
    for (const auto flag : obs.observed) n_obs += flag;
    io::write_report(opt.out / (opt.prefix + "report.txt"),
                     {{"observations", std::to_string(n_obs)},
                      {"mean_abs_estimate", fmt(res.smoothed_interior.cwiseAbs().mean())},
                      {"max_posterior_variance", fmt(res.posterior_variance.maxCoeff())}});
    return 0;
}

// --------------------------------------------------------------- denoise --

int run_denoise(const Options& opt) {
    const PrecisionSystem sys = load_model(parse_model_config(opt.config));
    const auto dec = shells(sys.spec);
    const auto model = factorize(permute_system(sys, dec), sys.boundary_cov);
    const Matrix noisy = io::read_pgm(opt.in_path);
    Matrix ref;
    const bool has_ref = !opt.ref_path.empty();
    if (has_ref) ref = io::read_pgm(opt.ref_path);
    const DenoiseResult res =
        denoise_image(model, dec, noisy, opt.noise_var, has_ref ? &ref : nullptr);
    fs::path out_img = opt.out_file;
    if (out_img.empty()) out_img = opt.out / "denoised.pgm";
    if (out_img.has_parent_path()) fs::create_directories(out_img.parent_path());
    io::write_pgm(out_img, res.denoised);
    std::vector<std::pair<std::string, std::string>> kv{
        {"noise_var", fmt(res.report.noise_var)},
        {"mean_offset", fmt(res.report.mean_offset)}};
    if (has_ref) {
        kv.emplace_back("mse_in", fmt(res.report.mse_in));
        kv.emplace_back("mse_out", fmt(res.report.mse_out));
    }
    io::write_report(out_img.string() + ".report.txt", kv);
    return 0;
}

// ---------------------------------------------------------------- verify --

struct Check {
    std::string name;
    bool pass;
    double error;
};

std::vector<Check> run_verify_suite() {
    std::vector<Check> checks;
    const auto add = [&checks](const std::string& name, double err, double tol) {
        checks.push_back({name, err <= tol, err});
    };

    // Brownian bridge prediction coefficient vs the covariance ratio.
    {
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            const double r = 0.01 + 0.9 * i / 50.0;
            const double s = r + 0.5 * (1.0 - r) * (i % 7 + 1) / 8.0;
            worst = std::max(worst, std::abs(bb_predict(r, s) -
                                             bb_covariance(s, r) / bb_covariance(r, r)));
        }
        add("bb_coefficient_grid", worst, 1e-14);
    }
    // Covariance factorization R(s,t) = coeff * R(r,t) across t < r < s.
    {
        CounterRng rng(321);
        double worst = 0.0;
        int used = 0;
        while (used < 100) {
            double a = rng.next_uniform(), b = rng.next_uniform(), c = rng.next_uniform();
            if (a > b) std::swap(a, b);
            if (b > c) std::swap(b, c);
            if (a > b) std::swap(a, b);
            if (c >= 1.0 || a <= 0.0 || a == b || b == c) continue;
            worst = std::max(worst, std::abs(bb_covariance(c, a) -
                                             bb_predict(b, c) * bb_covariance(b, a)));
            ++used;
        }
        add("bb_factorization_identity", worst, 1e-14);
    }
    // Telescoped bridge simulation reproduces the covariance.
    {
        const int n_paths = 100000;
        double var_half = 0.0, cross = 0.0;
        for (int k = 0; k < n_paths; ++k) {
            const auto p = bb_telescope_sample(4, static_cast<std::uint64_t>(k));
            var_half += p[2] * p[2];
            cross += p[1] * p[3];
        }
        var_half /= n_paths;
        cross /= n_paths;
        const double se_var = std::sqrt(2.0) * 0.25 / std::sqrt(static_cast<double>(n_paths));
        const double se_cross = std::sqrt(0.1875 * 0.1875 + 0.0625 * 0.0625) /
                                std::sqrt(static_cast<double>(n_paths));
        add("bb_simulated_variance", std::abs(var_half - 0.25), 5.0 * se_var);
        add("bb_simulated_cross", std::abs(cross - 0.0625), 5.0 * se_cross);
    }
    // Isotropic covariance-derivative jump: closed form vs finite differences.
    {
        const auto grid_error = [](const RadialCovariance& cov, double diag) {
            double worst = 0.0;
            for (double lambda : {0.1, 0.3, 0.5, 0.7, 0.9})
                for (double dtheta : {0.0, 0.4, 0.9, 1.7, 3.0}) {
                    const double closed = dtheta == 0.0 ? diag : 0.0;
                    worst = std::max(worst,
                                     std::abs(c_lambda_numeric(cov, lambda, 0.2, 0.2 + dtheta) -
                                              closed));
                }
            return worst;
        };
        auto exp1 = RadialCovariance::analytic([](double t) { return std::exp(-t); },
                                               [](double t) { return -std::exp(-t); });
        auto exp2 = RadialCovariance::analytic([](double t) { return std::exp(-2.0 * t); },
                                               [](double t) { return -2.0 * std::exp(-2.0 * t); });
        auto whit = RadialCovariance::analytic([](double t) { return whittle_upsilon(t); },
                                               [](double t) { return whittle_upsilon_prime(t); });
        add("c_lambda_exp_grid", grid_error(exp1, 2.0), 1e-4);
        add("c_lambda_exp2_grid", grid_error(exp2, 4.0), 1e-4);
        add("c_lambda_whittle_grid", grid_error(whit, 0.0), 1e-4);
    }
    // Driving-noise increment variance is the parameter gap.
    {
        auto exp1 = RadialCovariance::analytic([](double t) { return std::exp(-t); },
                                               [](double t) { return -std::exp(-t); });
        const auto spec = NoiseSpec::isotropic(exp1);
        const auto m = w_increment_moments(spec, 0.7, 0.2, 1.3, 1.3);
        add("w_increment_variance", std::abs(m.increment_var - 0.5), 1e-7);
        const auto off = w_increment_moments(spec, 0.9, 0.9, 0.3, 1.9);
        add("w_same_level_offdiagonal", std::abs(off.same_level_cov), 1e-12);
    }
    // Whittle field.
    {
        add("whittle_upsilon_zero", std::abs(whittle_upsilon(0.0) - 0.5), 1e-7);
        add("whittle_upsilon_prime_zero", std::abs(whittle_upsilon_prime(0.0)), 1e-6);
        double prev = whittle_upsilon(0.0);
        double worst_increase = 0.0;
        for (int i = 1; i <= 10; ++i) {
            const double cur = whittle_upsilon(0.1 * i);
            worst_increase = std::max(worst_increase, cur - prev);
            prev = cur;
        }
        add("whittle_monotone", std::max(worst_increase, 0.0), 0.0);
        double worst_delta = 0.0;
        for (double t : {0.0, 0.3, 1.0, 2.5, 4.0})
            worst_delta =
                std::max(worst_delta, std::abs(whittle_upsilon(t, 1e-8) - whittle_upsilon(t, 5e-9)));
        add("whittle_quadrature_stability", worst_delta, 1e-7);
    }
    return checks;
}

int run_verify(const Options& opt) {
    const auto checks = run_verify_suite();
    ensure_out_dir(opt.out);
    std::vector<std::pair<std::string, std::string>> kv;
    bool all = true;
    for (const auto& c : checks) {
        kv.emplace_back(c.name + ".status", c.pass ? "pass" : "fail");
        kv.emplace_back(c.name + ".error", fmt(c.error));
        all = all && c.pass;
        std::cout << (c.pass ? "pass " : "FAIL ") << c.name << " (error " << fmt(c.error)
                  << ")\n";
    }
    kv.emplace_back("fd_step_mu", "1e-05");
    kv.emplace_back("fd_step_upsilon", "1e-06");
    kv.emplace_back("quadrature_tolerance", "1e-08");
    io::write_report(opt.out / "verify_report.txt", kv);
    if (!all) {
        std::cerr << "verify: at least one check failed\n";
        return 1;
    }
    return 0;
}

// -------------------------------------------------------------- surfaces --

int run_surfaces(const Options& opt) {
    PlanarDomain domain = opt.domain_path.empty()
                              ? PlanarDomain::regular_polygon(opt.n_samples)
                              : [&] {
                                    const Matrix v = io::read_csv(opt.domain_path);
                                    if (v.cols() != 2)
                                        throw std::invalid_argument(
                                            "domain csv needs two columns (x,y)");
                                    std::vector<Point> pts;
                                    for (Eigen::Index i = 0; i < v.rows(); ++i)
                                        pts.push_back({v(i, 0), v(i, 1)});
                                    return PlanarDomain(pts);
                                }();
    HomotopySpec h = HomotopySpec::radial();
    if (opt.kind == "radial") {
        h = HomotopySpec::radial();
    } else if (opt.kind == "shifted") {
        h = HomotopySpec::shifted_circle(opt.c1, opt.c2);
    } else if (opt.kind == "affine") {
        h = HomotopySpec::affine(domain, {opt.c1, opt.c2});
    } else if (opt.kind == "ellipse") {
        h = HomotopySpec::ellipse([](double l) { return 1.0 - l; },
                                  [](double l) { return (1.0 - l) * (1.0 - l); });
    } else {
        throw std::invalid_argument("surfaces: unknown kind '" + opt.kind + "'");
    }

    ensure_out_dir(opt.out);
    std::vector<std::vector<Point>> all;
    for (int li = 0; li <= opt.n_lambda; ++li) {
        const double lambda = static_cast<double>(li) / opt.n_lambda;
        const auto pts = surface(h, lambda, opt.n_samples);
        all.push_back(pts);
        Matrix m(static_cast<Eigen::Index>(pts.size()), 2);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            m(static_cast<Eigen::Index>(i), 0) = pts[i].x;
            m(static_cast<Eigen::Index>(i), 1) = pts[i].y;
        }
        char name[32];
        std::snprintf(name, sizeof(name), "surface_%03d.csv", li);
        io::write_csv(opt.out / name, m);
    }

    // Property report plus the star-center verdict for affine kinds.
    const auto rep = validate_homotopy(h, domain, opt.n_samples, std::max(opt.n_lambda, 8));
    std::vector<std::pair<std::string, std::string>> kv{
        {"h_continuous", rep.continuous ? "pass" : "fail"},
        {"p1_traces_boundary", rep.p1_traces_boundary ? "pass" : "fail"},
        {"p1_collapses", rep.p1_collapses ? "pass" : "fail"},
        {"p2_sampled_only", rep.p2_sampled ? "pass" : "fail"},
        {"p3_nested", rep.p3_nested ? "pass" : "fail"},
        {"p4_covers", rep.p4_covers ? "pass" : "fail"},
        {"p4_fraction", fmt(rep.p4_fraction)},
        {"p4_epsilon", fmt(rep.p4_epsilon)},
        {"boundary_grid", std::to_string(opt.n_samples)},
        {"lambda_grid", std::to_string(std::max(opt.n_lambda, 8))}};
    if (opt.kind == "affine" || opt.kind == "shifted")
        kv.emplace_back("star_center",
                        check_star_center(domain, {opt.c1, opt.c2}) ? "true" : "false");
    io::write_report(opt.out / "surfaces_report.txt", kv);

    // SVG overlay of the sampled surfaces over the domain outline.
    std::ofstream svg(opt.out / "surfaces.svg");
    if (!svg) throw std::runtime_error("cannot write surfaces.svg");
    double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
    for (const Point v : domain.vertices()) {
        lo_x = std::min(lo_x, v.x);
        hi_x = std::max(hi_x, v.x);
        lo_y = std::min(lo_y, v.y);
        hi_y = std::max(hi_y, v.y);
    }
    const double pad = 0.05 * std::max(hi_x - lo_x, hi_y - lo_y);
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << fmt(lo_x - pad) << ' '
        << fmt(lo_y - pad) << ' ' << fmt(hi_x - lo_x + 2 * pad) << ' '
        << fmt(hi_y - lo_y + 2 * pad) << "\">\n";
    const auto path_of = [&](const std::vector<Point>& pts, const char* color, double width) {
        svg << "  <path fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width
            << "\" d=\"";
        for (std::size_t i = 0; i < pts.size(); ++i)
            svg << (i == 0 ? 'M' : 'L') << fmt(pts[i].x) << ' ' << fmt(pts[i].y);
        svg << "Z\"/>\n";
    };
    path_of(domain.vertices(), "#202020", 0.02);
    for (const auto& pts : all) path_of(pts, "#3a7abf", 0.01);
    svg << "</svg>\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"telescoping shell-chain models for lattice Gauss-Markov random fields"};
    app.require_subcommand(1);
    Options opt;
    app.add_option("--out", opt.out, "output directory")->capture_default_str();
    app.add_option("--seed", opt.seed, "base seed for randomized subcommands")
        ->capture_default_str();
    app.fallthrough();

    auto* sc_shells = app.add_subcommand("shells", "emit the shell decomposition as csv");
    sc_shells->add_option("--rows", opt.rows, "lattice rows")->required();
    sc_shells->add_option("--cols", opt.cols, "lattice cols")->required();

    auto* sc_build = app.add_subcommand("build", "assemble A, A_b, Sigma_b from a model config");
    sc_build->add_option("--config", opt.config, "model config file")->required();

    auto* sc_fact = app.add_subcommand("factorize", "compute the chain factors F_k, Q_k");
    sc_fact->add_option("--config", opt.config, "model config file")->required();

    auto* sc_sample = app.add_subcommand("sample", "draw seeded field realizations");
    sc_sample->add_option("--config", opt.config, "model config file")->required();
    sc_sample->add_option("--count", opt.count, "number of samples")->capture_default_str();
    sc_sample->add_option("--format", opt.format, "csv or pgm")->capture_default_str();

    auto* sc_est = app.add_subcommand("estimate", "filter + smooth noisy point observations");
    sc_est->add_option("--model", opt.config, "model config file")->required();
    sc_est->add_option("--obs", opt.obs_path, "observations csv (row,col,gain,variance,value)")
        ->required();
    sc_est->add_option("--prefix", opt.prefix, "output filename prefix")->capture_default_str();

    auto* sc_den = app.add_subcommand("denoise", "smooth a noisy pgm image");
    sc_den->add_option("--model", opt.config, "model config file")->required();
    sc_den->add_option("--in", opt.in_path, "noisy input pgm")->required();
    sc_den->add_option("--noise-var", opt.noise_var, "observation noise variance")->required();
    sc_den->add_option("--ref", opt.ref_path, "clean reference pgm (optional)");
    sc_den->add_option("--out", opt.out_file, "output pgm path (default <out dir>/denoised.pgm)");

    auto* sc_verify = app.add_subcommand("verify", "run the continuous-index check suite");

    auto* sc_surf = app.add_subcommand("surfaces", "emit telescoping surfaces and an svg overlay");
    sc_surf->add_option("--kind", opt.kind, "radial | shifted | affine | ellipse")
        ->capture_default_str();
    sc_surf->add_option("--c1", opt.c1, "center x for shifted/affine kinds")
        ->capture_default_str();
    sc_surf->add_option("--c2", opt.c2, "center y for shifted/affine kinds")
        ->capture_default_str();
    sc_surf->add_option("--domain", opt.domain_path, "polygon csv (x,y per row, ccw)");
    sc_surf->add_option("--lambdas", opt.n_lambda, "number of lambda steps")
        ->capture_default_str();
    sc_surf->add_option("--samples", opt.n_samples, "points per surface")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sc_shells->parsed()) return run_shells(opt);
        if (sc_build->parsed()) return run_build(opt);
        if (sc_fact->parsed()) return run_factorize(opt);
        if (sc_sample->parsed()) return run_sample(opt);
        if (sc_est->parsed()) return run_estimate(opt);
        if (sc_den->parsed()) return run_denoise(opt);
        if (sc_verify->parsed()) return run_verify(opt);
        if (sc_surf->parsed()) return run_surfaces(opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
