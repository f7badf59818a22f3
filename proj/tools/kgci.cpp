// kgci: command-line front end for the interval library.
#include "kgci/errors.hpp"
#include "kgci/io.hpp"
#include "kgci/monte_carlo.hpp"
#include "kgci/optimizer.hpp"
#include "kgci/performance.hpp"
#include "kgci/regression.hpp"
#include "kgci/theory_bounds.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace kgci;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;

std::string joined_args(int argc, char** argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        if (i) out += ' ';
        out += argv[i];
    }
    return out;
}

void copy_config(const fs::path& config, const fs::path& dir) {
    fs::create_directories(dir);
    fs::copy_file(config, dir / "config.json", fs::copy_options::overwrite_existing);
}

int design_info(const std::string& path) {
    const auto pf = io::read_problem(path);
    const auto k = regression::design_constants(pf.problem);
    std::printf("v11=%.10g\nv22=%.10g\nv12=%.10g\nrho=%.6f\nm=%d\n", k.v11, k.v22, k.v12, k.rho, k.m);
    return 0;
}

int optimize(const std::string& config_path, const std::string& out, const std::string& command) {
    const fs::path cfg_path(config_path);
    const auto file = io::optimize_from_json(io::read_json(cfg_path), cfg_path.parent_path());
    const fs::path root(out);
    copy_config(cfg_path, root);
    io::write_manifest(root, io::make_manifest(command, config_path, out, file.seed));

    const auto grid = performance::uniform_grid(file.plot_gamma_max, 0.25);
    bool all_ok = true;
    io::LinePlot overlay{"squared scaled expected length", "gamma", "e^2(gamma)", {}, 1.0};
    std::ofstream summary;
    if (file.runs.size() > 1) {
        summary.open(root / "summary.csv");
        summary << "label,m,rho,criterion,sel0,sel0_squared,max_sel_squared,min_coverage,feasible,converged\n";
    }
    for (const auto& run : file.runs) {
        const fs::path dir = run.label.empty() ? root : root / run.label;
        fs::create_directories(dir);
        std::fprintf(stderr, "optimizing %s (m=%d, rho=%g)\n", run.label.empty() ? "run" : run.label.c_str(),
                     run.config.m, run.config.rho);
        const auto report = optim::optimize(run.config);
        io::write_json(dir / "family.json", io::family_to_json(report.family));
        io::write_json(dir / "report.json", io::report_to_json(report, run.config));
        const auto curve = performance::curves(report.family, run.config.rho, grid);
        io::write_curves_csv(dir / "curves.csv", curve);
        io::write_family_csv(dir / "family.csv", report.family);
        io::write_family_plots(dir, report.family, curve, run.label.empty() ? "optimized interval" : run.label);
        if (dir != root) io::write_manifest(dir, io::make_manifest(command, config_path, dir.string(), file.seed));
        overlay.series.push_back({run.label, curve.gamma_grid, curve.sel_squared});
        std::printf("%s criterion=%.6f e(0)^2=%.6f max e^2=%.6f min coverage=%.6f feasible=%d converged=%d\n",
                    run.label.empty() ? "result" : run.label.c_str(), report.criterion_value,
                    report.sel0 * report.sel0, report.max_sel * report.max_sel, report.min_coverage_achieved,
                    report.feasible, report.converged);
        if (summary.is_open()) {
            summary << run.label << ',' << run.config.m << ',' << io::format_double(run.config.rho) << ','
                    << io::format_double(report.criterion_value) << ',' << io::format_double(report.sel0) << ','
                    << io::format_double(report.sel0 * report.sel0) << ','
                    << io::format_double(report.max_sel * report.max_sel) << ','
                    << io::format_double(report.min_coverage_achieved) << ',' << report.feasible << ','
                    << report.converged << '\n';
        }
        all_ok = all_ok && report.feasible && report.converged;
    }
    if (file.runs.size() > 1) io::write_svg(root / "sel_squared_all.svg", overlay);
    return all_ok ? 0 : kExitInfeasible;
}

int evaluate(const std::string& family_path, double rho, double gamma_max, const std::string& out,
             const std::string& command) {
    const auto family = io::read_family(family_path);
    const fs::path dir(out);
    copy_config(family_path, dir);
    io::write_manifest(dir, io::make_manifest(command, family_path, out, 0));
    const auto grid = performance::uniform_grid(gamma_max, 0.25);
    const auto curve = performance::curves(family, rho, grid);
    io::write_curves_csv(dir / "curves.csv", curve);
    io::write_family_plots(dir, family, curve, "interval family");
    double lo = 1.0;
    for (double c : curve.coverage) lo = std::min(lo, c);
    std::printf("e(0)^2=%.6f min coverage on grid=%.8f\n", curve.sel_squared.front(), lo);
    return 0;
}

int interval(const std::string& problem_path, const std::string& data_path, const std::string& family_path,
             bool naive, double test_size) {
    const auto pf = io::read_problem(problem_path);
    const auto y = io::read_response(data_path);
    if (y.size() != pf.problem.X.rows()) {
        throw ConfigError(data_path + ": expected " + std::to_string(pf.problem.X.rows()) + " responses, found " +
                          std::to_string(y.size()));
    }
    const auto k = regression::design_constants(pf.problem);
    const auto f = regression::fit(pf.problem, y);
    regression::ConfidenceInterval ci;
    const char* name = "standard";
    if (!family_path.empty()) {
        const auto family = io::read_family(family_path);
        if (family.m() != k.m) throw ConfigError("family m differs from the residual df of the design");
        ci = regression::kg_interval(f, k, family);
        name = "kg";
    } else if (naive) {
        ci = regression::naive_interval(f, k, pf.alpha, test_size > 0.0 ? test_size : pf.alpha);
        name = "naive";
    } else {
        ci = regression::standard_interval(f, k, pf.alpha);
    }
    std::printf("theta_hat=%.10g tau_hat=%.10g sigma_hat=%.10g\n", f.theta_hat, f.tau_hat, f.sigma_hat);
    std::printf("%s interval: [%.10g, %.10g] width=%.10g\n", name, ci.lower, ci.upper, ci.width());
    return 0;
}

int bound(const std::vector<int>& ms, double alpha, double d, const std::string& out, const std::string& command) {
    std::vector<bounds::BoundResult> rows;
    for (int m : ms) {
        rows.push_back(bounds::theorem3_bound(m, alpha, d));
        const auto& r = rows.back();
        std::printf("m=%d lambda=%.8g nu=%.8g eta=%.8g bound=%.8g\n", r.m, r.lambda_m, r.nu_m, r.eta_m,
                    r.lower_bound);
    }
    const fs::path dir(out);
    fs::create_directories(dir);
    io::write_manifest(dir, io::make_manifest(command, "", out, 0));
    io::write_bounds_csv(dir / "bounds.csv", rows);
    return 0;
}

int simulate(const std::string& spec_path, const std::string& out, const std::string& command) {
    const fs::path p(spec_path);
    const auto file = io::simulate_from_json(io::read_json(p), p.parent_path());
    const fs::path dir(out);
    copy_config(p, dir);
    io::write_manifest(dir, io::make_manifest(command, spec_path, out, file.spec.seed));
    const auto rows = mc::sweep(file.spec, file.gamma_grid);
    io::write_simulation_csv(dir / "simulation.csv", rows);
    for (const auto& r : rows) {
        std::printf("gamma=%g coverage=%.6f (se %.2g) sel=%.6f lower miss=%.6f upper miss=%.6f\n", r.gamma,
                    r.coverage_hat, r.se_coverage, r.sel_hat, r.lower_miss_rate, r.upper_miss_rate);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Confidence intervals that use uncertain prior information in linear regression"};
    app.require_subcommand(1);
    const std::string command = joined_args(argc, argv);

    std::string problem_path, config_path, family_path, data_path, spec_path, out_dir = "out";
    double rho = 0.0, gamma_max = 50.0, alpha = 0.05, d = 12.0, test_size = 0.0;
    bool standard = false, naive = false;
    std::vector<int> m_list{1, 2, 5, 20, 200};

    auto* info = app.add_subcommand("design-info", "print v11, v22, v12, rho and m of a design");
    info->add_option("problem", problem_path, "problem JSON")->required()->check(CLI::ExistingFile);

    auto* opt = app.add_subcommand("optimize", "compute an optimized interval family");
    opt->add_option("config", config_path, "optimizer config JSON")->required()->check(CLI::ExistingFile);
    opt->add_option("-o,--output", out_dir, "output directory");

    auto* eval = app.add_subcommand("evaluate", "coverage and expected length curves of a family");
    eval->add_option("family", family_path, "family JSON")->required()->check(CLI::ExistingFile);
    eval->add_option("--rho", rho, "correlation of the two estimators")->required()->check(CLI::Range(-1.0, 1.0));
    eval->add_option("--gamma-max", gamma_max, "upper end of the gamma grid")->check(CLI::PositiveNumber);
    eval->add_option("-o,--output", out_dir, "output directory");

    auto* ivl = app.add_subcommand("interval", "realized interval for observed data");
    ivl->add_option("problem", problem_path, "problem JSON")->required()->check(CLI::ExistingFile);
    ivl->add_option("data", data_path, "response vector, one value per line")->required()->check(CLI::ExistingFile);
    auto* fam_opt = ivl->add_option("--family", family_path, "family JSON")->check(CLI::ExistingFile);
    auto* std_opt = ivl->add_flag("--standard", standard, "standard interval (default)");
    auto* naive_opt = ivl->add_flag("--naive", naive, "pre-test interval");
    ivl->add_option("--test-size", test_size, "size of the preliminary test (default alpha)");
    fam_opt->excludes(std_opt)->excludes(naive_opt);
    std_opt->excludes(naive_opt);

    auto* bnd = app.add_subcommand("bound", "lower bound on e(0) for rho = 0");
    bnd->add_option("--m-list", m_list, "residual degrees of freedom")->delimiter(',');
    bnd->add_option("--alpha", alpha, "1 - coverage")->check(CLI::Range(0.0, 1.0));
    bnd->add_option("--d", d, "cut-off")->check(CLI::PositiveNumber);
    bnd->add_option("-o,--output", out_dir, "output directory");

    auto* sim = app.add_subcommand("simulate", "Monte Carlo coverage and length");
    sim->add_option("spec", spec_path, "simulation spec JSON")->required()->check(CLI::ExistingFile);
    sim->add_option("-o,--output", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfig;
    }

    try {
        if (*info) return design_info(problem_path);
        if (*opt) return optimize(config_path, out_dir, command);
        if (*eval) return evaluate(family_path, rho, gamma_max, out_dir, command);
        if (*ivl) return interval(problem_path, data_path, family_path, naive, test_size);
        if (*bnd) return bound(m_list, alpha, d, out_dir, command);
        if (*sim) return simulate(spec_path, out_dir, command);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
