#include "kgci/special_functions.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace kgci::special;

TEST_CASE("normal cdf and quantile") {
    for (double x : {-8.0, -3.3, -1.0, -0.2, 0.0, 0.5, 1.96, 4.0, 7.5}) {
        CHECK(normal_cdf(x) == doctest::Approx(oracle::Phi(x)).epsilon(1e-13));
        CHECK(normal_pdf(x) == doctest::Approx(oracle::phi(x)).epsilon(1e-14));
    }
    for (double p : {1e-12, 1e-6, 0.025, 0.3, 0.5, 0.9, 0.975, 1 - 1e-9}) {
        CHECK(oracle::Phi(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-11));
    }
}

TEST_CASE("t quantiles with closed forms") {
    // m = 1 is Cauchy: P(|T| <= t) = 2 atan(t) / pi.
    for (double a : {0.01, 0.05, 0.1, 0.5}) {
        CHECK(t_quantile(1, a) == doctest::Approx(std::tan(0.5 * oracle::kPi * (1.0 - a))).epsilon(1e-11));
    }
    // m = 2: P(|T| <= t) = t / sqrt(2 + t^2).
    for (double a : {0.01, 0.05, 0.2}) {
        const double p = 1.0 - a;
        CHECK(t_quantile(2, a) == doctest::Approx(std::sqrt(2.0 * p * p / (1.0 - p * p))).epsilon(1e-11));
    }
}

TEST_CASE("t quantiles against integrated density") {
    for (int m : {3, 5, 10, 30, 200}) {
        const double t = t_quantile(m, 0.05);
        CHECK(oracle::t_cdf(t, m) == doctest::Approx(0.975).epsilon(1e-10));
        CHECK(t_two_sided_prob(t, m) == doctest::Approx(0.95).epsilon(1e-12));
    }
}

TEST_CASE("chi-square distribution") {
    // m = 2 is exponential with mean 2.
    for (double q : {0.01, 0.5, 2.0, 9.0, 40.0}) {
        CHECK(chi2_cdf(q, 2) == doctest::Approx(-std::expm1(-0.5 * q)).epsilon(1e-13));
        CHECK(chi2_sf(q, 2) == doctest::Approx(std::exp(-0.5 * q)).epsilon(1e-12));
    }
    for (int m : {1, 3, 7, 50}) {
        for (double q : {0.3, 2.5, 11.0}) {
            // m = 1 has a singular density at 0 but P(Q <= q) = P(|Z| <= sqrt(q)).
            const double ref = m == 1 ? std::erf(std::sqrt(q / 2.0))
                                      : oracle::integrate(
                                            [&](double u) {
                                                return std::exp((0.5 * m - 1) * std::log(u) - 0.5 * u -
                                                                0.5 * m * std::log(2.0) - std::lgamma(0.5 * m));
                                            },
                                            1e-300, q, 256, 1e-16);
            CHECK(chi2_cdf(q, m) == doctest::Approx(ref).epsilon(1e-9));
        }
        for (double p : {1e-7, 0.05, 0.5, 0.999}) {
            CHECK(chi2_cdf(chi2_quantile(p, m), m) == doctest::Approx(p).epsilon(1e-10));
        }
    }
}

TEST_CASE("incomplete beta against quadrature") {
    for (double a : {0.5, 1.0, 2.5, 30.0}) {
        for (double b : {0.5, 3.0, 12.0}) {
            for (double x : {0.05, 0.4, 0.93}) {
                const double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
                // Substitute x = u^2 to remove the endpoint singularity when a < 1.
                auto f = [&](double u) {
                    return 2.0 * std::pow(u, 2.0 * a - 1.0) * std::pow(1.0 - u * u, b - 1.0) * std::exp(-lbeta);
                };
                const double ref = oracle::integrate(f, 0.0, std::sqrt(x), 256, 1e-16);
                CHECK(beta_inc(a, b, x, 1.0 - x) == doctest::Approx(ref).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("W density and E(W)") {
    for (int m : {1, 2, 5, 200}) {
        for (double w : {0.1, 0.8, 1.0, 1.7}) {
            CHECK(w_pdf(w, m) == doctest::Approx(oracle::w_density(w, m)).epsilon(1e-11));
        }
        const double mean =
            oracle::integrate([&](double w) { return w * oracle::w_density(w, m); }, 0.0, oracle::w_upper(m), 256);
        CHECK(e_w(m) == doctest::Approx(mean).epsilon(1e-10));
    }
    // E(W) for m = 1 is E|Z| = sqrt(2/pi).
    CHECK(e_w(1) == doctest::Approx(std::sqrt(2.0 / oracle::kPi)).epsilon(1e-14));
}

TEST_CASE("closed-form lemmas match their defining integrals") {
    for (int m : {1, 2, 3, 5, 10, 200}) {
        for (double x : {0.0, 0.7, 3.0, 12.0}) {
            const double ref = oracle::integrate(
                [&](double w) { return oracle::phi(w * x) * w * w * oracle::w_density(w, m); }, 0.0,
                oracle::w_upper(m), 256);
            CHECK(lemma1(x, m) == doctest::Approx(ref).epsilon(1e-9));
            const double tt = 2.0;
            const double ref2 = oracle::integrate(
                [&](double w) { return oracle::phi(tt * w) * oracle::phi(w * x) * w * w * oracle::w_density(w, m); },
                0.0, oracle::w_upper(m), 256);
            CHECK(lemma2(tt, x, m) == doctest::Approx(ref2).epsilon(1e-9));
        }
    }
}

TEST_CASE("Gauss-Legendre rules") {
    for (int order : {2, 5, 16, 32}) {
        const auto& g = gauss_legendre(order);
        REQUIRE(g.nodes.size() == static_cast<std::size_t>(order));
        // Exact for polynomials of degree 2n - 1.
        for (int k = 0; k <= 2 * order - 1; ++k) {
            double s = 0.0;
            for (int i = 0; i < order; ++i) s += g.weights[i] * std::pow(g.nodes[i], k);
            const double exact = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1);
            CHECK(s == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
        }
    }
    const auto rule = gauss_legendre_panels(0.0, 3.0, 7, 8);
    CHECK(rule.integrate([](double x) { return std::exp(-x); }) == doctest::Approx(1.0 - std::exp(-3.0)).epsilon(1e-14));
    const std::vector<double> br{0.0, 0.3, 2.0};
    const auto rb = gauss_legendre_breakpoints(br, 0.5, 6);
    CHECK(rb.integrate([](double x) { return std::fabs(x - 0.3); }) ==
          doctest::Approx(0.5 * 0.09 + 0.5 * 1.7 * 1.7).epsilon(1e-14));
}

TEST_CASE("W quadrature captures the mass of f_W") {
    for (int m : {1, 4, 200}) {
        const auto rule = w_quadrature(m, 1e-12);
        const double mass = rule.integrate([&](double w) { return w_pdf(w, m); });
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
    }
}
