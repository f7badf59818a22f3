#include "kgci/performance.hpp"
#include "kgci/special_functions.hpp"
#include "kgci/spline_family.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace kgci;
using namespace kgci::performance;

namespace {

IntervalFamily sample_family(int m) {
    const double t = special::t_quantile(m, 0.05);
    return IntervalFamily::build(12.0, m, 0.05, {0, 3, 6, 9, 12}, {0.4, 0.9, 0.3},
                                 {0, 1.5, 3, 4.5, 6, 7.5, 9, 10.5, 12},
                                 {0.7 * t, 0.8 * t, 0.95 * t, 1.1 * t, 1.15 * t, 1.12 * t, 1.06 * t, 1.02 * t});
}

// E over W of int phi(h - gamma) g(h, w) dh, by adaptive Simpson in both variables.
double expect_hw(int m, double gamma, const std::function<double(double, double)>& g) {
    auto inner = [&](double w) {
        if (w <= 0.0) return 0.0;
        auto f = [&](double h) { return oracle::phi(h - gamma) * g(h, w); };
        return oracle::integrate(f, gamma - 9.0, gamma + 9.0, 48, 1e-12) * oracle::w_density(w, m);
    };
    return oracle::integrate(inner, 0.0, oracle::w_upper(m), 64, 1e-11);
}

double oracle_coverage(const IntervalFamily& f, double gamma, double rho) {
    const double sd = std::sqrt(1.0 - rho * rho);
    return expect_hw(f.m(), gamma, [&](double h, double w) {
        const double x = h / w;
        const double bb = (x < 0 ? -1.0 : 1.0) * f.eval_b(std::fabs(x)), ss = f.eval_s(std::fabs(x));
        const double mu = rho * (h - gamma);
        return oracle::Phi((w * bb + w * ss - mu) / sd) - oracle::Phi((w * bb - w * ss - mu) / sd);
    });
}

double oracle_sel(const IntervalFamily& f, double gamma) {
    const double ew = std::exp(std::lgamma(0.5 * (f.m() + 1)) - std::lgamma(0.5 * f.m())) * std::sqrt(2.0 / f.m());
    return expect_hw(f.m(), gamma, [&](double h, double w) { return w * f.eval_s(std::fabs(h / w)); }) /
           (f.t_m() * ew);
}

}  // namespace

TEST_CASE("reverted family has coverage exactly 1 - alpha") {
    for (int m : {1, 5, 200}) {
        const auto f = IntervalFamily::reverted(10.0, m, 0.05, {0, 5, 10}, {0, 5, 10});
        for (double rho : {0.0, 0.5, -0.816496}) {
            for (double g : {0.0, 1.0, 20.0}) CHECK(std::fabs(coverage(g, f, rho) - 0.95) < 1e-10);
        }
        CHECK(sel(0.0, f) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("coverage and sel against two-dimensional integration") {
    for (int m : {1, 3}) {
        const auto f = sample_family(m);
        for (double rho : {0.0, 0.6}) {
            for (double g : {0.0, 2.5, 9.0}) {
                CHECK(coverage(g, f, rho) == doctest::Approx(oracle_coverage(f, g, rho)).epsilon(2e-8));
            }
        }
        for (double g : {0.0, 4.0}) CHECK(sel(g, f) == doctest::Approx(oracle_sel(f, g)).epsilon(2e-8));
    }
}

TEST_CASE("difference form agrees with the direct expectation") {
    const auto shape = IntervalShape::from_family(sample_family(2));
    for (double rho : {0.0, -0.4, 0.8}) {
        for (double g : {0.0, 1.0, 6.0, 14.0}) {
            CHECK(coverage(g, shape, rho) == doctest::Approx(coverage_direct(g, shape, rho)).epsilon(1e-8));
        }
    }
}

TEST_CASE("coverage is even in gamma") {
    const auto f = sample_family(4);
    for (double g : {0.5, 3.0, 8.0}) CHECK(coverage(g, f, 0.5) == doctest::Approx(coverage(-g, f, 0.5)).epsilon(1e-12));
}

TEST_CASE("criterion closed form against sel integrated over gamma") {
    for (int m : {1, 3}) {
        const auto f = sample_family(m);
        const double xi = 0.15;
        // e - 1 is even; for small m its tail reaches far beyond d because W has a long tail.
        const auto rule = special::gauss_legendre_breakpoints(std::vector<double>{0, 3, 6, 9, 12, 18, 26, 40, 60, 100, 160, 250}, 1.0, 16);
        const double integral = 2.0 * rule.integrate([&](double g) { return sel(g, f) - 1.0; });
        const double assembled = xi * integral + (sel(0.0, f) - 1.0);
        CHECK(criterion_a(f, xi) == doctest::Approx(assembled).epsilon(1e-4));
    }
}

TEST_CASE("Gaussian-weighted criterion against its closed form") {
    const auto f = sample_family(2);
    const double xi = 0.15, v = 0.3, c = std::sqrt(1.0 + v * v);
    const double ew = special::e_w(2);
    // (2 / (t E W)) int_0^d (s - t) (xi + lemma1(x / c) / c) dx, lemma1 from its integral.
    auto lemma = [&](double x) {
        return oracle::integrate([&](double w) { return oracle::phi(w * x) * w * w * oracle::w_density(w, 2); }, 0.0,
                                 oracle::w_upper(2), 32, 1e-13);
    };
    const double ref = 2.0 / (f.t_m() * ew) *
                       oracle::integrate([&](double x) { return (f.eval_s(x) - f.t_m()) * (xi + lemma(x / c) / c); },
                                         0.0, 12.0, 16, 1e-11);
    CHECK(criterion_b(f, xi, v) == doctest::Approx(ref).epsilon(1e-6));
}

TEST_CASE("evaluator gradients against finite differences") {
    const auto shape = IntervalShape::from_family(sample_family(2));
    Evaluator ev(shape, 0.5, QuadratureSettings::fast());
    const auto& L = ev.layout();
    std::vector<double> b(L.x.size()), s(L.x.size());
    for (std::size_t k = 0; k < L.x.size(); ++k) {
        b[k] = shape.eval_b(L.x[k]);
        s[k] = shape.eval_s(L.x[k]);
    }
    ev.set_values(b, s);
    std::vector<double> gb(L.x.size()), gs(L.x.size());
    const double gamma = 2.0;
    ev.coverage(gamma, gb, gs);
    for (std::size_t k : {std::size_t{3}, L.x.size() / 2, L.x.size() - 2}) {
        const double h = 1e-5;
        auto bp = b, bm = b;
        bp[k] += h;
        bm[k] -= h;
        ev.set_values(bp, s);
        const double cp = ev.coverage(gamma);
        ev.set_values(bm, s);
        const double cm = ev.coverage(gamma);
        CHECK(gb[k] == doctest::Approx((cp - cm) / (2 * h)).epsilon(1e-5).scale(1e-9));
        auto sp = s, sm = s;
        sp[k] += h;
        sm[k] -= h;
        ev.set_values(b, sp);
        const double dp = ev.coverage(gamma);
        ev.set_values(b, sm);
        const double dm = ev.coverage(gamma);
        CHECK(gs[k] == doctest::Approx((dp - dm) / (2 * h)).epsilon(1e-5).scale(1e-9));
        ev.set_values(b, s);
    }
    // sel is affine in s.
    const auto w = ev.sel_weights(1.0);
    double lin = 1.0;
    for (std::size_t k = 0; k < w.size(); ++k) lin += w[k] * (s[k] - ev.t_m());
    CHECK(ev.sel(1.0) == doctest::Approx(lin).epsilon(1e-13));
}

TEST_CASE("tail envelope bounds the coverage error far out") {
    const auto f = sample_family(3);
    const auto shape = IntervalShape::from_family(f);
    Evaluator ev(shape, 0.6, {});
    std::vector<double> b, s;
    for (double x : ev.layout().x) {
        b.push_back(f.eval_b(x));
        s.push_back(f.eval_s(x));
    }
    ev.set_values(b, s);
    for (double g : {20.0, 30.0, 45.0}) {
        CHECK(std::fabs(ev.coverage(g) - 0.95) <= ev.tail_envelope(g) + 1e-14);
    }
}

TEST_CASE("with rho = 0 a non-zero b never raises coverage") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double t = special::t_quantile(2, 0.05);
    for (int rep = 0; rep < 3; ++rep) {
        std::vector<double> sv;
        for (int k = 0; k < 4; ++k) sv.push_back(t * (1.0 + 0.2 * u(rng)));
        const auto s_only = IntervalFamily::build(8, 2, 0.05, {0, 2, 4, 6, 8}, {0, 0, 0}, {0, 2, 4, 6, 8}, sv);
        const auto with_b = IntervalFamily::build(8, 2, 0.05, {0, 2, 4, 6, 8}, {u(rng), u(rng), u(rng)},
                                                  {0, 2, 4, 6, 8}, sv);
        for (double g : {0.0, 1.5, 4.0, 9.0}) CHECK(coverage(g, with_b, 0.0) <= coverage(g, s_only, 0.0) + 1e-9);
    }
}

TEST_CASE("min coverage and max sel search") {
    const auto f = sample_family(3);
    const auto grid = uniform_grid(20.0, 0.5);
    REQUIRE(grid.size() == 41);
    const auto mc = min_coverage(f, 0.3, grid);
    for (double g : grid) CHECK(coverage(g, f, 0.3) >= mc.value - 1e-12);
    const auto ms = max_sel(f, 20.0);
    for (double g : grid) CHECK(sel(g, f) <= ms.value + 1e-12);
}
