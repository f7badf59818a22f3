#include "kgci/errors.hpp"
#include "kgci/optimizer.hpp"
#include "kgci/performance.hpp"

#include <doctest.h>

#include <cmath>

using namespace kgci;
using namespace kgci::optim;

namespace {

OptimizationConfig small_config() {
    OptimizationConfig c;
    c.xi = 0.15;
    c.d = 6.0;
    c.m = 10;
    c.rho = 0.6;
    c.knots_b = {0, 2, 4, 6};
    c.knots_s = {0, 2, 4, 6};
    return c;
}

}  // namespace

TEST_CASE("config validation") {
    auto c = small_config();
    CHECK_NOTHROW(c.validate());
    c.ell = 1.05;
    CHECK_THROWS_AS(c.validate(), ConfigError);  // both modes
    c.xi.reset();
    CHECK_NOTHROW(c.validate());
    c.ell = 0.9;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small_config();
    c.knots_s = {0, 3, 2, 6};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small_config();
    c.rho = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("constraint grid covers the region where coverage can differ") {
    const auto c = small_config();
    const auto g = constraint_grid(c, 0.25);
    CHECK(g.front() == 0.0);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
    CHECK(g.back() >= c.d + c.gamma_margin);
    // Dense up to d + margin.
    for (std::size_t i = 1; i < g.size() && g[i] <= c.d + c.gamma_margin; ++i) CHECK(g[i] - g[i - 1] <= 0.25 + 1e-12);
}

TEST_CASE("certifying the reverted family") {
    const auto c = small_config();
    const auto fam = IntervalFamily::reverted(c.d, c.m, c.alpha, c.knots_b, c.knots_s);
    const auto r = certify(fam, c);
    CHECK(r.feasible);
    CHECK(r.criterion_value == doctest::Approx(0.0).scale(1.0));
    CHECK(r.min_coverage_achieved == doctest::Approx(0.95).epsilon(1e-9));
    CHECK(r.sel0 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("small optimization improves on the standard interval") {
    const auto c = small_config();
    const auto r = optimize(c);
    CHECK(r.feasible);
    CHECK(r.converged);
    CHECK(r.criterion_value < -1e-3);
    CHECK(r.sel0 < 1.0);
    CHECK(r.min_coverage_achieved >= 0.95 - c.coverage_tolerance);
    CHECK(r.shape.s_unimodal);
    CHECK(r.shape.b_unimodal_on_0d);
    const double direct = performance::criterion_a(r.family, *c.xi);
    CHECK(r.criterion_value == doctest::Approx(direct).epsilon(1e-8));
}

TEST_CASE("b fixed at zero and sign restrictions") {
    auto c = small_config();
    c.rho = 0.0;
    const auto z = optimize_b_zero(c);
    for (double v : z.family.values_b()) CHECK(v == 0.0);
    CHECK(z.feasible);

    c.rho = 0.6;
    c.b_sign = BSign::NonPositive;
    const auto neg = optimize(c);
    for (double x = 0.0; x <= c.d; x += 0.05) CHECK(neg.family.eval_b(x) <= 1e-9);
}

TEST_CASE("length-cap mode respects the cap") {
    auto c = small_config();
    c.xi.reset();
    c.ell = 1.02;
    const auto r = optimize(c);
    CHECK(r.feasible);
    CHECK(r.max_sel <= 1.02 + 1e-4);
    CHECK(r.sel0 < 1.0);
}
