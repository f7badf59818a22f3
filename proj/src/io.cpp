#include "kgci/io.hpp"

#include "kgci/errors.hpp"
#include "kgci/special_functions.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace kgci::io {

namespace {

constexpr const char* kToolVersion = "1.0.0";

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
    throw ConfigError("field '" + field + "': " + what);
}

const json& require(const json& j, const std::string& field) {
    if (!j.is_object()) throw ConfigError("expected a JSON object");
    const auto it = j.find(field);
    if (it == j.end()) field_error(field, "missing");
    return *it;
}

double as_number(const json& v, const std::string& field) {
    if (!v.is_number()) field_error(field, "expected a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& field) {
    if (!v.is_number_integer()) field_error(field, "expected an integer");
    return v.get<int>();
}

std::vector<double> as_vector(const json& v, const std::string& field) {
    if (!v.is_array()) field_error(field, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) field_error(field + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

double number_or(const json& j, const std::string& field, double fallback) {
    const auto it = j.find(field);
    return it == j.end() ? fallback : as_number(*it, field);
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

// Roughly five round tick values covering [lo, hi].
std::vector<double> ticks(double lo, double hi) {
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double f : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        step = f * mag;
        if (step >= raw) break;
    }
    std::vector<double> out;
    for (double v = std::ceil(lo / step - 1e-9) * step; v <= hi + 1e-9 * step; v += step) out.push_back(v);
    return out;
}

std::string tick_label(double v) {
    std::ostringstream s;
    s << std::setprecision(6) << (std::fabs(v) < 1e-12 ? 0.0 : v);
    return s.str();
}

IntervalFamily build_family(const json& j) {
    return IntervalFamily::build(as_number(require(j, "d"), "d"), as_int(require(j, "m"), "m"),
                                 as_number(require(j, "alpha"), "alpha"),
                                 as_vector(require(j, "knots_b"), "knots_b"),
                                 as_vector(require(j, "values_b"), "values_b"),
                                 as_vector(require(j, "knots_s"), "knots_s"),
                                 as_vector(require(j, "values_s"), "values_s"));
}

}  // namespace

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t pos = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n');
        const auto last_nl = text.rfind('\n', pos == 0 ? 0 : pos - 1);
        const auto col = last_nl == std::string::npos ? pos + 1 : pos - last_nl;
        std::ostringstream msg;
        msg << path.string() << ":" << line << ":" << col << ": " << e.what();
        throw ConfigError(msg.str());
    }
}

void write_json(const fs::path& path, const json& value) {
    auto out = open_out(path);
    out << std::setw(2) << value << "\n";
}

ProblemFile problem_from_json(const json& j) {
    ProblemFile f;
    const auto& xj = require(j, "X");
    if (!xj.is_array() || xj.empty()) field_error("X", "expected a non-empty array of rows");
    const auto n = static_cast<Eigen::Index>(xj.size());
    Eigen::Index p = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto row = as_vector(xj[static_cast<std::size_t>(i)], "X[" + std::to_string(i) + "]");
        if (p < 0) {
            p = static_cast<Eigen::Index>(row.size());
            f.problem.X.resize(n, p);
        }
        if (static_cast<Eigen::Index>(row.size()) != p) field_error("X", "rows differ in length");
        for (Eigen::Index k = 0; k < p; ++k) f.problem.X(i, k) = row[static_cast<std::size_t>(k)];
    }
    f.problem.a = to_eigen(as_vector(require(j, "a"), "a"));
    f.problem.c = to_eigen(as_vector(require(j, "c"), "c"));
    if (f.problem.a.size() != p) field_error("a", "length differs from the columns of X");
    if (f.problem.c.size() != p) field_error("c", "length differs from the columns of X");
    f.problem.t = number_or(j, "t", 0.0);
    f.alpha = number_or(j, "alpha", 0.05);
    if (!(f.alpha > 0.0 && f.alpha < 1.0)) field_error("alpha", "must lie in (0,1)");
    try {
        regression::validate(f.problem);
    } catch (const Error& e) {
        throw ConfigError(std::string("problem: ") + e.what());
    }
    return f;
}

ProblemFile read_problem(const fs::path& path) { return problem_from_json(read_json(path)); }

json family_to_json(const IntervalFamily& f) {
    return json{{"d", f.d()},           {"m", f.m()},
                {"alpha", f.alpha()},   {"knots_b", f.knots_b()},
                {"values_b", f.values_b()}, {"knots_s", f.knots_s()},
                {"values_s", f.values_s()}};
}

IntervalFamily family_from_json(const json& j) {
    try {
        return build_family(j);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

IntervalFamily read_family(const fs::path& path) { return family_from_json(read_json(path)); }

OptimizeFile optimize_from_json(const json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw ConfigError("optimize config: expected a JSON object");
    optim::OptimizationConfig base;
    base.alpha = number_or(j, "alpha", base.alpha);
    if (j.contains("xi")) base.xi = as_number(j["xi"], "xi");
    if (j.contains("ell")) base.ell = as_number(j["ell"], "ell");
    if (j.contains("gaussian_v")) base.gaussian_v = as_number(j["gaussian_v"], "gaussian_v");
    base.d = as_number(require(j, "d"), "d");
    base.knots_b = as_vector(require(j, "knots_b"), "knots_b");
    base.knots_s = as_vector(require(j, "knots_s"), "knots_s");
    base.coverage_tolerance = number_or(j, "coverage_tolerance", base.coverage_tolerance);
    if (j.contains("max_iterations")) base.max_iterations = as_int(j["max_iterations"], "max_iterations");
    if (j.contains("multistart_count")) base.multistart_count = as_int(j["multistart_count"], "multistart_count");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) field_error("seed", "expected a non-negative integer");
        base.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("penalty")) {
        const auto& p = j["penalty"];
        if (!p.is_object()) field_error("penalty", "expected an object");
        base.penalty_initial = number_or(p, "initial", base.penalty_initial);
        base.penalty_growth = number_or(p, "growth", base.penalty_growth);
        base.penalty_max = number_or(p, "max", base.penalty_max);
    }
    if (j.contains("b_sign")) {
        const auto& v = j["b_sign"];
        if (!v.is_string()) field_error("b_sign", "expected a string");
        const auto s = v.get<std::string>();
        if (s == "none") base.b_sign = optim::BSign::None;
        else if (s == "nonnegative") base.b_sign = optim::BSign::NonNegative;
        else if (s == "nonpositive") base.b_sign = optim::BSign::NonPositive;
        else field_error("b_sign", "expected none, nonnegative or nonpositive");
    }
    if (j.contains("enforce_unimodal")) {
        if (!j["enforce_unimodal"].is_boolean()) field_error("enforce_unimodal", "expected true or false");
        base.enforce_unimodal = j["enforce_unimodal"].get<bool>();
    }
    if (j.contains("unimodal_b")) {
        if (!j["unimodal_b"].is_boolean()) field_error("unimodal_b", "expected true or false");
        base.unimodal_b = j["unimodal_b"].get<bool>();
    }
    if (j.contains("method")) {
        const auto& v = j["method"];
        if (!v.is_string()) field_error("method", "expected a string");
        const auto s = v.get<std::string>();
        if (s == "sequential-qp") base.method = optim::Method::SequentialQp;
        else if (s == "sequential-lp") base.method = optim::Method::SequentialLp;
        else if (s == "nelder-mead") base.method = optim::Method::NelderMead;
        else field_error("method", "expected sequential-qp, sequential-lp or nelder-mead");
    }
    base.gamma_step = number_or(j, "gamma_step", base.gamma_step);
    base.gamma_margin = number_or(j, "gamma_margin", base.gamma_margin);

    // Design: either a problem file or explicit rho and m.
    std::vector<double> rhos;
    std::vector<int> ms;
    if (j.contains("problem")) {
        if (!j["problem"].is_string()) field_error("problem", "expected a path");
        const auto pf = read_problem(base_dir / j["problem"].get<std::string>());
        const auto k = regression::design_constants(pf.problem);
        rhos.push_back(k.rho);
        ms.push_back(k.m);
    } else {
        const auto& r = require(j, "rho");
        if (r.is_array()) rhos = as_vector(r, "rho");
        else rhos.push_back(as_number(r, "rho"));
        const auto& mv = require(j, "m");
        if (mv.is_array()) {
            for (std::size_t i = 0; i < mv.size(); ++i) ms.push_back(as_int(mv[i], "m[" + std::to_string(i) + "]"));
        } else {
            ms.push_back(as_int(mv, "m"));
        }
    }
    if (rhos.empty()) field_error("rho", "empty list");
    if (ms.empty()) field_error("m", "empty list");

    OptimizeFile f;
    f.seed = base.seed;
    f.plot_gamma_max = number_or(j, "plot_gamma_max", base.d + 10.0);
    for (int m : ms) {
        for (double rho : rhos) {
            OptimizeRun run;
            run.config = base;
            run.config.m = m;
            run.config.rho = rho;
            if (ms.size() > 1 || rhos.size() > 1) {
                std::ostringstream label;
                label << "m" << m << "_rho" << rho;
                run.label = label.str();
            }
            try {
                run.config.validate();
            } catch (const ConfigError& e) {
                throw ConfigError(std::string("optimize config: ") + e.what());
            }
            f.runs.push_back(std::move(run));
        }
    }
    return f;
}

json report_to_json(const optim::OptimizationReport& r, const optim::OptimizationConfig& c) {
    json j;
    j["criterion_value"] = r.criterion_value;
    j["min_coverage_achieved"] = r.min_coverage_achieved;
    j["min_coverage_gamma"] = r.min_coverage_gamma;
    j["max_sel"] = r.max_sel;
    j["max_sel_gamma"] = r.max_sel_gamma;
    j["max_sel_squared"] = r.max_sel * r.max_sel;
    j["sel0"] = r.sel0;
    j["sel0_squared"] = r.sel0 * r.sel0;
    j["iterations"] = r.iterations;
    j["feasible"] = r.feasible;
    j["converged"] = r.converged;
    j["best_start"] = r.best_start;
    j["shape"] = {{"s_unimodal", r.shape.s_unimodal},
                  {"b_unimodal_on_0d", r.shape.b_unimodal_on_0d},
                  {"s_positive", r.shape.s_positive},
                  {"max_violation", r.shape.max_violation}};
    json cfg{{"alpha", c.alpha},
             {"d", c.d},
             {"m", c.m},
             {"rho", c.rho},
             {"knots_b", c.knots_b},
             {"knots_s", c.knots_s},
             {"coverage_tolerance", c.coverage_tolerance},
             {"max_iterations", c.max_iterations},
             {"multistart_count", c.multistart_count},
             {"seed", c.seed},
             {"method", optim::to_string(c.method)},
             {"b_sign", optim::to_string(c.b_sign)},
             {"enforce_unimodal", c.enforce_unimodal},
             {"unimodal_b", c.unimodal_b}};
    if (c.xi) cfg["xi"] = *c.xi;
    if (c.ell) cfg["ell"] = *c.ell;
    if (c.gaussian_v) cfg["gaussian_v"] = *c.gaussian_v;
    j["config"] = cfg;
    j["family"] = family_to_json(r.family);
    return j;
}

SimulateFile simulate_from_json(const json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw ConfigError("simulate spec: expected a JSON object");
    SimulateFile f;
    auto& s = f.spec;
    const auto& pj = require(j, "procedure");
    if (!pj.is_string()) field_error("procedure", "expected a string");
    const auto proc = pj.get<std::string>();
    if (proc == "standard") s.procedure = mc::Procedure::Standard;
    else if (proc == "naive") s.procedure = mc::Procedure::Naive;
    else if (proc == "kg") s.procedure = mc::Procedure::Kg;
    else field_error("procedure", "expected standard, naive or kg");
    s.rho = as_number(require(j, "rho"), "rho");
    s.m = as_int(require(j, "m"), "m");
    s.alpha = number_or(j, "alpha", s.alpha);
    s.test_size = number_or(j, "test_size", s.alpha);
    s.v11 = number_or(j, "v11", 1.0);
    s.v22 = number_or(j, "v22", 1.0);
    if (j.contains("reps")) {
        if (!j["reps"].is_number_unsigned()) field_error("reps", "expected a positive integer");
        s.reps = j["reps"].get<std::uint64_t>();
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) field_error("seed", "expected a non-negative integer");
        s.seed = j["seed"].get<std::uint64_t>();
    }
    if (s.procedure == mc::Procedure::Kg) {
        const auto& fj = require(j, "family");
        if (fj.is_string()) {
            s.family = std::make_shared<IntervalFamily>(read_family(base_dir / fj.get<std::string>()));
        } else {
            s.family = std::make_shared<IntervalFamily>(family_from_json(fj));
        }
    }
    if (j.contains("gamma_grid")) {
        f.gamma_grid = as_vector(j["gamma_grid"], "gamma_grid");
    } else {
        f.gamma_grid.push_back(as_number(require(j, "gamma"), "gamma"));
    }
    if (f.gamma_grid.empty()) field_error("gamma_grid", "empty");
    return f;
}

Eigen::VectorXd read_response(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::vector<double> values;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;
        const auto end = line.find_first_of(",; \t\r", start);
        const std::string token = line.substr(start, end == std::string::npos ? std::string::npos : end - start);
        double v = 0.0;
        const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
        if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
            if (values.empty() && lineno == 1) continue;
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected a number");
        }
        values.push_back(v);
    }
    return to_eigen(values);
}

std::string format_double(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

void write_family_csv(const fs::path& path, const IntervalFamily& family, int points) {
    auto out = open_out(path);
    out << "x,b,s\n";
    for (int i = 0; i < points; ++i) {
        const double x = family.d() * i / (points - 1);
        out << format_double(x) << ',' << format_double(family.eval_b(x)) << ','
            << format_double(family.eval_s(x)) << '\n';
    }
}

void write_curves_csv(const fs::path& path, const performance::PerformanceCurve& c) {
    auto out = open_out(path);
    out << "gamma,coverage,sel,sel_squared\n";
    for (std::size_t i = 0; i < c.gamma_grid.size(); ++i) {
        out << format_double(c.gamma_grid[i]) << ',' << format_double(c.coverage[i]) << ','
            << format_double(c.sel[i]) << ',' << format_double(c.sel_squared[i]) << '\n';
    }
}

void write_bounds_csv(const fs::path& path, const std::vector<bounds::BoundResult>& rows) {
    auto out = open_out(path);
    out << "m,lambda_m,nu_m,eta_m,lower_bound\n";
    for (const auto& r : rows) {
        out << r.m << ',' << format_double(r.lambda_m) << ',' << format_double(r.nu_m) << ','
            << format_double(r.eta_m) << ',' << format_double(r.lower_bound) << '\n';
    }
}

void write_simulation_csv(const fs::path& path, const std::vector<mc::SimulationReport>& rows) {
    auto out = open_out(path);
    out << "gamma,coverage_hat,se_cov,sel_hat,se_sel,lower_miss,upper_miss\n";
    for (const auto& r : rows) {
        out << format_double(r.gamma) << ',' << format_double(r.coverage_hat) << ','
            << format_double(r.se_coverage) << ',' << format_double(r.sel_hat) << ','
            << format_double(r.se_sel) << ',' << format_double(r.lower_miss_rate) << ','
            << format_double(r.upper_miss_rate) << '\n';
    }
}

std::string render_svg(const LinePlot& plot, int width, int height) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : plot.series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    }
    if (plot.reference) {
        y0 = std::min(y0, *plot.reference);
        y1 = std::max(y1, *plot.reference);
    }
    if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    if (x1 - x0 < 1e-12) x1 = x0 + 1.0;
    if (y1 - y0 < 1e-12 * std::max(1.0, std::fabs(y0))) {
        const double pad = std::max(1e-6, 0.05 * std::fabs(y0));
        y0 -= pad;
        y1 += pad;
    } else {
        const double pad = 0.05 * (y1 - y0);
        y0 -= pad;
        y1 += pad;
    }

    const double left = 70, right = 20, top = 40, bottom = 50;
    const double pw = width - left - right;
    const double ph = height - top - bottom;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

    std::ostringstream o;
    o << std::setprecision(6);
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << xml_escape(plot.title) << "</text>\n";
    o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : ticks(x0, x1)) {
        o << "<line x1=\"" << px(t) << "\" y1=\"" << top + ph << "\" x2=\"" << px(t) << "\" y2=\""
          << top + ph + 5 << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << px(t) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
          << tick_label(t) << "</text>\n";
    }
    for (double t : ticks(y0, y1)) {
        o << "<line x1=\"" << left - 5 << "\" y1=\"" << py(t) << "\" x2=\"" << left << "\" y2=\"" << py(t)
          << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << left - 8 << "\" y=\"" << py(t) + 4 << "\" text-anchor=\"end\">" << tick_label(t)
          << "</text>\n";
    }
    o << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">"
      << xml_escape(plot.x_label) << "</text>\n";
    o << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << top + ph / 2 << ")\">" << xml_escape(plot.y_label) << "</text>\n";
    if (plot.reference) {
        o << "<line x1=\"" << left << "\" y1=\"" << py(*plot.reference) << "\" x2=\"" << left + pw << "\" y2=\""
          << py(*plot.reference) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    }
    static const char* colors[] = {"#1f4e9c", "#b8322a", "#2a8a3e", "#8a5a00", "#6b3fa0"};
    for (std::size_t k = 0; k < plot.series.size(); ++k) {
        const auto& s = plot.series[k];
        o << "<polyline fill=\"none\" stroke=\"" << colors[k % 5] << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            o << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        }
        o << "\"/>\n";
        if (!s.name.empty()) {
            o << "<text x=\"" << left + pw - 8 << "\" y=\"" << top + 16 + 14 * k << "\" text-anchor=\"end\" fill=\""
              << colors[k % 5] << "\">" << xml_escape(s.name) << "</text>\n";
        }
    }
    o << "</svg>\n";
    return o.str();
}

void write_svg(const fs::path& path, const LinePlot& plot) {
    auto out = open_out(path);
    out << render_svg(plot);
}

void write_family_plots(const fs::path& dir, const IntervalFamily& family,
                        const performance::PerformanceCurve& curve, const std::string& title) {
    const int points = 401;
    Series b{"b(x)", {}, {}}, s{"s(x)", {}, {}};
    for (int i = 0; i < points; ++i) {
        const double x = family.d() * i / (points - 1);
        b.x.push_back(x);
        b.y.push_back(family.eval_b(x));
        s.x.push_back(x);
        s.y.push_back(family.eval_s(x));
    }
    write_svg(dir / "b.svg", LinePlot{title + ": b", "x", "b(x)", {b}, 0.0});
    write_svg(dir / "s.svg", LinePlot{title + ": s", "x", "s(x)", {s}, family.t_m()});
    write_svg(dir / "coverage.svg",
              LinePlot{title + ": coverage", "gamma", "coverage probability",
                       {Series{"", curve.gamma_grid, curve.coverage}}, 1.0 - family.alpha()});
    write_svg(dir / "sel_squared.svg",
              LinePlot{title + ": squared scaled expected length", "gamma", "e^2(gamma)",
                       {Series{"", curve.gamma_grid, curve.sel_squared}}, 1.0});
}

RunManifest make_manifest(const std::string& command, const std::string& config_path,
                          const std::string& output_dir, std::uint64_t seed) {
    RunManifest m;
    m.command = command;
    m.config_path = config_path;
    m.output_dir = output_dir;
    m.tool_version = kToolVersion;
    m.seed = seed;
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream ts;
    ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    m.timestamp = ts.str();
    return m;
}

void write_manifest(const fs::path& dir, const RunManifest& m) {
    write_json(dir / "manifest.json", json{{"command", m.command},
                                           {"config_path", m.config_path},
                                           {"output_dir", m.output_dir},
                                           {"tool_version", m.tool_version},
                                           {"timestamp", m.timestamp},
                                           {"seed", m.seed}});
}

}  // namespace kgci::io
