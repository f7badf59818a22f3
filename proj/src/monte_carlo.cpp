#include "kgci/monte_carlo.hpp"

#include "kgci/errors.hpp"
#include "kgci/parallel.hpp"
#include "kgci/special_functions.hpp"

#include <cmath>

namespace kgci::mc {

namespace {

constexpr std::uint64_t kBlock = 8192;

struct Tally {
    std::uint64_t covered = 0;
    std::uint64_t lower = 0;
    std::uint64_t upper = 0;
    double sum_len = 0.0;
    double sum_len2 = 0.0;
};

void check(const SimulationSpec& spec) {
    if (spec.m < 1) throw Error("simulate: m must be at least 1");
    if (!(std::fabs(spec.rho) < 1.0)) throw Error("simulate: |rho| must be below 1");
    if (spec.reps == 0) throw Error("simulate: reps must be positive");
    if (spec.procedure == Procedure::Kg && !spec.family) throw Error("simulate: kg procedure needs a family");
    if (spec.procedure == Procedure::Kg && spec.family->m() != spec.m) {
        throw Error("simulate: family m differs from spec m");
    }
}

SimulationReport finish(const SimulationSpec& spec, const Tally& t) {
    SimulationReport r;
    r.gamma = spec.gamma;
    r.reps = spec.reps;
    r.covered = t.covered;
    r.lower_misses = t.lower;
    r.upper_misses = t.upper;
    const double n = static_cast<double>(spec.reps);
    auto rate = [n](std::uint64_t k, double& p, double& se) {
        p = static_cast<double>(k) / n;
        se = std::sqrt(p * (1.0 - p) / n);
    };
    rate(t.covered, r.coverage_hat, r.se_coverage);
    rate(t.lower, r.lower_miss_rate, r.se_lower);
    rate(t.upper, r.upper_miss_rate, r.se_upper);
    const double norm = 1.0 / (special::t_quantile(spec.m, spec.alpha) * special::e_w(spec.m));
    const double mean = t.sum_len / n;
    const double var = std::max(0.0, t.sum_len2 / n - mean * mean);
    r.sel_hat = norm * mean;
    r.se_sel = norm * std::sqrt(var / n);
    return r;
}

void tally(Tally& t, double g, const PivotalInterval& iv) {
    const double dev = g - iv.centre;
    // dev > half: theta lies below the lower endpoint.
    if (dev > iv.half) ++t.lower;
    else if (dev < -iv.half) ++t.upper;
    else ++t.covered;
    t.sum_len += iv.half;
    t.sum_len2 += iv.half * iv.half;
}

}  // namespace

std::uint64_t CounterRng::mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t CounterRng::derive(std::uint64_t key, std::uint64_t index) {
    return mix(mix(key) ^ mix(index + 0x632be59bd9b4e019ULL));
}

std::uint64_t CounterRng::next() { return mix(key_ ^ mix(counter_++)); }

double CounterRng::uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

double CounterRng::normal() { return special::normal_quantile(uniform()); }

double CounterRng::gamma(double shape) {
    if (shape < 1.0) {
        const double u = uniform();
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
        double x;
        double v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

PivotalDraw draw(CounterRng& rng, double gamma, double rho, int m) {
    PivotalDraw x;
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    x.h = gamma + z1;
    x.g = rho * z1 + std::sqrt(1.0 - rho * rho) * z2;
    x.w = std::sqrt(2.0 * rng.gamma(0.5 * m) / m);
    return x;
}

IntervalRule::IntervalRule(const SimulationSpec& spec)
    : procedure_(spec.procedure),
      family_(spec.family),
      rho_(spec.rho),
      m_(spec.m),
      t_m_(special::t_quantile(spec.m, spec.alpha)),
      t_m1_(special::t_quantile(spec.m + 1, spec.alpha)),
      t_test_(special::t_quantile(spec.m, spec.test_size)) {}

PivotalInterval IntervalRule::operator()(const PivotalDraw& x) const {
    PivotalInterval iv;
    switch (procedure_) {
        case Procedure::Standard:
            iv.half = x.w * t_m_;
            break;
        case Procedure::Kg: {
            const double z = x.w > 0.0 ? x.h / x.w : 0.0;
            iv.centre = x.w * family_->eval_b(z);
            iv.half = x.w * family_->eval_s(std::fabs(z));
            break;
        }
        case Procedure::Naive:
            if (std::fabs(x.h) > t_test_ * x.w) {
                iv.half = x.w * t_m_;
            } else {
                const double s2 = (m_ * x.w * x.w + x.h * x.h) / (m_ + 1.0);
                iv.centre = rho_ * x.h;
                iv.half = t_m1_ * std::sqrt(s2) * std::sqrt(1.0 - rho_ * rho_);
            }
            break;
    }
    return iv;
}

SimulationReport simulate(const SimulationSpec& spec) {
    check(spec);
    const IntervalRule rule(spec);
    const std::uint64_t blocks = (spec.reps + kBlock - 1) / kBlock;
    std::vector<Tally> parts(blocks);
    parallel_for(blocks, [&](std::size_t b) {
        Tally t;
        const std::uint64_t first = b * kBlock;
        const std::uint64_t last = std::min(spec.reps, first + kBlock);
        for (std::uint64_t i = first; i < last; ++i) {
            CounterRng rng(CounterRng::derive(spec.seed, i));
            const auto x = draw(rng, spec.gamma, spec.rho, spec.m);
            tally(t, x.g, rule(x));
        }
        parts[b] = t;
    });
    Tally total;
    for (const auto& t : parts) {
        total.covered += t.covered;
        total.lower += t.lower;
        total.upper += t.upper;
        total.sum_len += t.sum_len;
        total.sum_len2 += t.sum_len2;
    }
    return finish(spec, total);
}

std::vector<SimulationReport> sweep(const SimulationSpec& spec, std::span<const double> grid) {
    if (grid.empty()) throw Error("sweep: empty gamma grid");
    std::vector<SimulationReport> out;
    out.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        SimulationSpec s = spec;
        s.gamma = grid[i];
        s.seed = CounterRng::derive(spec.seed, i);
        out.push_back(simulate(s));
    }
    return out;
}

SimulationReport simulate_raw(const regression::RegressionProblem& problem, const SimulationSpec& spec,
                              double sigma) {
    check(spec);
    const auto consts = regression::design_constants(problem);
    if (spec.m != consts.m) throw Error("simulate_raw: spec m differs from n - p");
    // Minimum-norm beta with c'beta - t = gamma sigma sqrt(v22).
    const double target = problem.t + spec.gamma * sigma * std::sqrt(consts.v22);
    const Eigen::VectorXd beta = problem.c * (target / problem.c.squaredNorm());
    const double theta = problem.a.dot(beta);
    const Eigen::VectorXd mean = problem.X * beta;
    Tally t;
    for (std::uint64_t i = 0; i < spec.reps; ++i) {
        CounterRng rng(CounterRng::derive(spec.seed, i));
        Eigen::VectorXd y(problem.n());
        for (Eigen::Index k = 0; k < y.size(); ++k) y(k) = mean(k) + sigma * rng.normal();
        const auto f = regression::fit(problem, y);
        regression::ConfidenceInterval ci;
        switch (spec.procedure) {
            case Procedure::Standard: ci = regression::standard_interval(f, consts, spec.alpha); break;
            case Procedure::Kg: ci = regression::kg_interval(f, consts, *spec.family); break;
            case Procedure::Naive: ci = regression::naive_interval(f, consts, spec.alpha, spec.test_size); break;
        }
        // Express in pivotal units so the shared tally applies.
        const double scale = sigma * std::sqrt(consts.v11);
        PivotalInterval iv;
        iv.centre = (f.theta_hat - ci.center()) / scale;
        iv.half = 0.5 * ci.width() / scale;
        tally(t, (f.theta_hat - theta) / scale, iv);
    }
    return finish(spec, t);
}

}  // namespace kgci::mc
