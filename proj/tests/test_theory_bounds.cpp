#include "kgci/performance.hpp"
#include "kgci/special_functions.hpp"
#include "kgci/theory_bounds.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace kgci;

namespace {

// Solving the defining equation for (1 - lambda) / lambda gives
// lambda = K / (K + A), K = sqrt(2/pi) t E(W), A = (1 + t^2/m)^(m/2 + 1).
double lambda_closed_form(int m, double alpha) {
    const double t = special::t_quantile(m, alpha);
    const double ew = std::exp(std::lgamma(0.5 * (m + 1)) - std::lgamma(0.5 * m)) * std::sqrt(2.0 / m);
    const double K = std::sqrt(2.0 / oracle::kPi) * t * ew;
    const double A = std::pow(1.0 + t * t / m, 0.5 * m + 1.0);
    return K / (K + A);
}

}  // namespace

TEST_CASE("lambda(m) from bisection, secant and the closed form") {
    for (int m : {1, 2, 3, 5, 20, 200}) {
        const double ref = lambda_closed_form(m, 0.05);
        CHECK(bounds::lambda_m(m, 0.05) == doctest::Approx(ref).epsilon(1e-9));
        CHECK(bounds::lambda_m_secant(m, 0.05) == doctest::Approx(ref).epsilon(1e-9));
        CHECK(std::fabs(bounds::lambda_residual(ref, m, 0.05)) < 1e-8);
    }
}

TEST_CASE("s_lambda minimizes the pointwise criterion") {
    const int m = 5;
    const double alpha = 0.05, d = 12.0;
    const double lam = bounds::lambda_m(m, alpha);
    const double t = special::t_quantile(m, alpha);
    const double ew = special::e_w(m);
    for (double x : {0.0, 1.0, 3.0, 8.0}) {
        // Derivative in the trial value tt vanishes at s_lambda(x).
        auto deriv = [&](double tt) {
            return lam / ((1 - lam) * t * ew) * std::sqrt(oracle::kPi / 2.0) * std::pow(m / (x * x + m), 0.5 * m + 1) -
                   std::pow(m / (tt * tt + x * x + m), 0.5 * m + 1);
        };
        const double root = deriv(1e-9) < 0 ? oracle::bisect(deriv, 1e-9, 1e3) : 0.0;
        CHECK(bounds::s_lambda(x, m, alpha, d) == doctest::Approx(root).epsilon(1e-8).scale(1.0));
    }
    CHECK(bounds::s_lambda(d + 1.0, m, alpha, d) == doctest::Approx(t));
}

TEST_CASE("eta_m is positive and shrinks with m") {
    double prev = 1e9;
    for (int m : {1, 2, 5, 20, 200}) {
        const auto r = bounds::theorem3_bound(m, 0.05, 12.0);
        CHECK(r.eta_m > 0.0);
        CHECK(r.eta_m < prev);
        CHECK(r.eta_m == doctest::Approx(r.nu_m * (1 - r.lambda_m) / r.lambda_m).epsilon(1e-12));
        CHECK(r.lower_bound == doctest::Approx(1.0 - r.eta_m).epsilon(1e-12));
        prev = r.eta_m;
    }
    CHECK(prev < 0.01);
}
