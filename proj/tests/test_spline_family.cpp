#include "kgci/errors.hpp"
#include "kgci/special_functions.hpp"
#include "kgci/spline_family.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace kgci;

namespace {

// Natural spline from the second-derivative equations, solved densely.
double natural_spline(const std::vector<double>& x, const std::vector<double>& y, double at) {
    const std::size_t n = x.size();
    std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
    std::vector<double> r(n, 0.0);
    A[0][0] = 1.0;
    A[n - 1][n - 1] = 1.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
        A[i][i - 1] = h0 / 6.0;
        A[i][i] = (h0 + h1) / 3.0;
        A[i][i + 1] = h1 / 6.0;
        r[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
    }
    const auto inv = oracle::invert(A);
    std::vector<double> M(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) M[i] += inv[i][j] * r[j];
    std::size_t k = 0;
    while (k + 2 < n && at > x[k + 1]) ++k;
    const double h = x[k + 1] - x[k];
    const double a = (x[k + 1] - at) / h, b = (at - x[k]) / h;
    return a * y[k] + b * y[k + 1] + ((a * a * a - a) * M[k] + (b * b * b - b) * M[k + 1]) * h * h / 6.0;
}

}  // namespace

TEST_CASE("natural spline matches the dense oracle") {
    const std::vector<double> x{0, 2, 4, 6, 8, 10, 25, 40};
    const std::vector<double> y{9.1, 11.0, 12.4, 12.1, 12.9, 13.3, 12.2, 12.7};
    NaturalCubicSpline s(x, y);
    for (double t = 0.0; t <= 40.0; t += 0.37) {
        CHECK(s(t) == doctest::Approx(natural_spline(x, y, t)).epsilon(1e-12));
    }
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(s(x[i]) == doctest::Approx(y[i]).epsilon(1e-14));
    // Zero curvature at both ends.
    const double h = 1e-3;
    const double c0 = (s(2 * h) - 2 * s(h) + s(0)) / (h * h);
    const double c1 = (s(40) - 2 * s(40 - h) + s(40 - 2 * h)) / (h * h);
    CHECK(std::fabs(c0) < 1e-2);
    CHECK(std::fabs(c1) < 1e-2);
    CHECK(s.derivative(7.3) == doctest::Approx((s(7.3 + 1e-6) - s(7.3 - 1e-6)) / 2e-6).epsilon(1e-6));
}

TEST_CASE("spline basis rows reproduce evaluation") {
    const std::vector<double> x{0, 1, 2.5, 3, 6};
    const std::vector<double> y{0, 0.4, -0.3, 0.8, 0};
    NaturalCubicSpline s(x, y);
    const std::vector<double> at{0.0, 0.5, 2.7, 4.4, 6.0};
    const auto B = NaturalCubicSpline::basis(x, at);
    const auto D = NaturalCubicSpline::derivative_basis(x, at);
    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), 5);
    const Eigen::VectorXd v = B * yv;
    const Eigen::VectorXd dv = D * yv;
    for (std::size_t i = 0; i < at.size(); ++i) {
        CHECK(v(i) == doctest::Approx(s(at[i])).epsilon(1e-13).scale(1.0));
        CHECK(dv(i) == doctest::Approx(s.derivative(at[i])).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("family boundary conditions and symmetry") {
    const auto fam = IntervalFamily::build(40.0, 1, 0.05, {0, 15, 18, 21, 24, 27, 30, 40},
                                           {0.1, 0.3, 0.5, 0.4, 0.2, 0.1}, {0, 2, 4, 6, 8, 10, 25, 40},
                                           {9, 10, 11, 12, 12.5, 13, 13.2});
    const double t1 = std::tan(0.5 * oracle::kPi * 0.95);
    CHECK(fam.t_m() == doctest::Approx(t1).epsilon(1e-12));
    CHECK(fam.eval_b(0.0) == 0.0);
    CHECK(fam.eval_b(40.0) == doctest::Approx(0.0).scale(1.0));
    CHECK(fam.eval_s(40.0) == doctest::Approx(t1).epsilon(1e-12));
    CHECK(fam.eval_b(55.0) == 0.0);
    CHECK(fam.eval_s(55.0) == doctest::Approx(t1).epsilon(1e-14));
    CHECK(fam.eval_b(-21.0) == doctest::Approx(-fam.eval_b(21.0)));
    CHECK(fam.eval_s(-6.0) == doctest::Approx(fam.eval_s(6.0)));
    CHECK(fam.eval_b(21.0) == doctest::Approx(0.5));
    CHECK(fam.eval_s(4.0) == doctest::Approx(11.0));
    const auto br = fam.breakpoints();
    CHECK(br.front() == 0.0);
    CHECK(br.back() == 40.0);
    CHECK(br.size() == 14);
}

TEST_CASE("invalid families are rejected") {
    CHECK_THROWS_AS(IntervalFamily::build(10, 1, 0.05, {0, 5, 4, 10}, {0, 0}, {0, 10}, {12}), KnotOrderError);
    CHECK_THROWS_AS(IntervalFamily::build(10, 1, 0.05, {0, 5, 10}, {0}, {1, 10}, {12}), KnotOrderError);
    CHECK_THROWS(IntervalFamily::build(10, 1, 0.05, {0, 5, 10}, {0, 1}, {0, 10}, {12}));
    CHECK_THROWS_AS(IntervalFamily::build(10, 1, 0.05, {0, 10}, {}, {0, 5, 10}, {-1.0, 3.0}), NonPositiveS);
}

TEST_CASE("shape report") {
    const std::vector<double> kb{0, 5, 10}, ks{0, 2.5, 5, 7.5, 10};
    const double t = special::t_quantile(3, 0.05);

    const auto reverted = IntervalFamily::reverted(10, 3, 0.05, kb, ks);
    auto r = shape_report(reverted);
    CHECK(r.s_unimodal);
    CHECK(r.b_unimodal_on_0d);
    CHECK(r.s_positive);

    // Two local maxima in s.
    const auto bumpy = IntervalFamily::build(10, 3, 0.05, kb, {0.0}, ks, {t / 3, t, 2 * t / 3, 4 * t / 3});
    r = shape_report(bumpy);
    CHECK_FALSE(r.s_unimodal);
    CHECK(r.s_violation > 0.0);

    // Rises then falls back to t(m).
    const auto hump = IntervalFamily::build(10, 3, 0.05, kb, {0.4}, ks, {0.8 * t, 1.1 * t, 1.2 * t, 1.1 * t});
    r = shape_report(hump);
    CHECK(r.s_unimodal);
    CHECK(r.b_unimodal_on_0d);
    CHECK(r.max_violation == doctest::Approx(0.0).scale(1.0));

    const std::vector<double> mono{1, 2, 3, 3, 2, 1};
    CHECK(unimodal_violation(mono) == 0.0);
    const std::vector<double> two{1, 3, 2, 4, 1};
    CHECK(unimodal_violation(two) == doctest::Approx(1.0));
}
