#include "kgci/special_functions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace kgci::special {

namespace {

constexpr int kMaxContinuedFractionIter = 10000;
constexpr double kRelTol = 1e-15;
constexpr double kTiny = 1e-300;

double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < kMaxContinuedFractionIter; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * kRelTol) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
double gamma_q_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxContinuedFractionIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kRelTol) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double beta_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m < kMaxContinuedFractionIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kRelTol) break;
    }
    return h;
}

GaussLegendre compute_gauss_legendre(int order) {
    GaussLegendre rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (order + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0;
            double p2 = 0.0;
            for (int j = 0; j < order; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1);
            }
            pp = order * (z * p1 - p2) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::fabs(z - z1) < 1e-16) break;
        }
        rule.nodes[i] = -z;
        rule.nodes[order - 1 - i] = z;
        const double w = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.weights[i] = w;
        rule.weights[order - 1 - i] = w;
    }
    return rule;
}

void append_panel(QuadratureRule& rule, double a, double b, const GaussLegendre& gl) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        rule.nodes.push_back(mid + half * gl.nodes[i]);
        rule.weights.push_back(half * gl.weights[i]);
    }
}

}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_quantile(double p) {
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    if (p >= 1.0) return std::numeric_limits<double>::infinity();
    // Acklam's rational approximation followed by one Halley step.
    static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                             -2.759285104469687e+02, 1.383577518672690e+02,
                                             -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                             -1.556989798598866e+02, 6.680131188771972e+01,
                                             -1.328068155288572e+01};
    static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                             -2.400758277161838e+00, -2.549732539343734e+00,
                                             4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                             2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Refine against the tail that carries the precision.
    const double e = (x < 0.0) ? normal_cdf(x) - p : (1.0 - p) - normal_cdf(-x);
    const double u = e * std::sqrt(2.0 * kPi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

double gamma_p(double a, double x) {
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_fraction(a, x);
}

double gamma_q(double a, double x) {
    if (x <= 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_fraction(a, x);
}

double beta_inc(double a, double b, double x, double one_minus_x) {
    if (x <= 0.0) return 0.0;
    if (one_minus_x <= 0.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log(one_minus_x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(a, b, x) / a;
    return 1.0 - front * beta_fraction(b, a, one_minus_x) / b;
}

double chi2_cdf(double q, int m) { return gamma_p(0.5 * m, 0.5 * q); }

double chi2_sf(double q, int m) { return gamma_q(0.5 * m, 0.5 * q); }

double chi2_pdf(double q, int m) {
    if (q <= 0.0) return (m == 2) ? 0.5 : 0.0;
    const double k = 0.5 * m;
    return std::exp((k - 1.0) * std::log(q) - 0.5 * q - k * std::log(2.0) - std::lgamma(k));
}

double chi2_quantile(double p, int m) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("chi2_quantile: p outside (0,1)");
    const bool upper = p > 0.5;
    const double target = upper ? 1.0 - p : p;
    auto tail = [&](double q) { return upper ? chi2_sf(q, m) : chi2_cdf(q, m); };
    double lo = std::log(1e-300);
    double hi = std::log(std::max(10.0, 10.0 * m) + 100.0);
    while (upper ? tail(std::exp(hi)) > target : tail(std::exp(hi)) < target) hi += 1.0;
    for (int i = 0; i < 400 && hi - lo > 1e-15 * std::max(1.0, std::fabs(hi)); ++i) {
        const double mid = 0.5 * (lo + hi);
        const double v = tail(std::exp(mid));
        const bool below_root = upper ? (v > target) : (v < target);
        (below_root ? lo : hi) = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

double t_two_sided_prob(double t, int m) {
    if (t <= 0.0) return 0.0;
    const double t2 = t * t;
    const double x = m / (m + t2);
    const double one_minus_x = t2 / (m + t2);
    return 1.0 - beta_inc(0.5 * m, 0.5, x, one_minus_x);
}

double t_quantile(int m, double alpha) {
    if (m < 1) throw std::domain_error("t_quantile: m must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("t_quantile: alpha outside (0,1)");
    // Compare the tail mass 1 - P(|T|<=t) = I_x(m/2, 1/2) with alpha directly.
    auto tail = [m](double t) {
        const double t2 = t * t;
        return beta_inc(0.5 * m, 0.5, m / (m + t2), t2 / (m + t2));
    };
    double lo = 0.0;
    double hi = 1.0;
    while (tail(hi) > alpha) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (tail(mid) > alpha ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double w_pdf(double w, int m) {
    if (w <= 0.0) return (m == 1) ? 2.0 * kInvSqrt2Pi : 0.0;
    return 2.0 * m * w * chi2_pdf(m * w * w, m);
}

double e_w(int m) {
    if (m < 1) throw std::domain_error("e_w: m must be >= 1");
    if (m > 300) {
        return std::sqrt(2.0 / m) * std::exp(std::lgamma(0.5 * (m + 1)) - std::lgamma(0.5 * m));
    }
    return std::sqrt(2.0 / m) * std::tgamma(0.5 * (m + 1)) / std::tgamma(0.5 * m);
}

double lemma1(double x, int m) {
    const double ratio = m / (x * x + m);
    return kInvSqrt2Pi * std::pow(ratio, 0.5 * m + 1.0);
}

double lemma2(double tt, double x, int m) {
    const double ratio = m / (tt * tt + x * x + m);
    return std::pow(ratio, 0.5 * m + 1.0) / (2.0 * kPi);
}

const GaussLegendre& gauss_legendre(int order) {
    if (order < 1 || order > 256) throw std::domain_error("gauss_legendre: order out of range");
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<GaussLegendre>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[order];
    if (!slot) slot = std::make_unique<GaussLegendre>(compute_gauss_legendre(order));
    return *slot;
}

QuadratureRule gauss_legendre_panels(double a, double b, int panels, int order) {
    if (!(a < b)) throw std::domain_error("gauss_legendre_panels: need a < b");
    if (panels < 1 || order < 2) throw std::domain_error("gauss_legendre_panels: bad sizes");
    const auto& gl = gauss_legendre(order);
    QuadratureRule rule;
    rule.lower = a;
    rule.upper = b;
    rule.nodes.reserve(static_cast<std::size_t>(panels) * order);
    rule.weights.reserve(static_cast<std::size_t>(panels) * order);
    const double h = (b - a) / panels;
    for (int k = 0; k < panels; ++k) {
        const double lo = a + k * h;
        const double hi = (k + 1 == panels) ? b : a + (k + 1) * h;
        append_panel(rule, lo, hi, gl);
    }
    return rule;
}

QuadratureRule gauss_legendre_breakpoints(std::span<const double> breakpoints, double max_panel,
                                          int order) {
    if (breakpoints.size() < 2) throw std::domain_error("need at least two breakpoints");
    const auto& gl = gauss_legendre(order);
    QuadratureRule rule;
    rule.lower = breakpoints.front();
    rule.upper = breakpoints.back();
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        const double a = breakpoints[i];
        const double b = breakpoints[i + 1];
        if (!(b > a)) continue;
        const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / max_panel - 1e-12)));
        const double h = (b - a) / pieces;
        for (int k = 0; k < pieces; ++k) {
            append_panel(rule, a + k * h, (k + 1 == pieces) ? b : a + (k + 1) * h, gl);
        }
    }
    return rule;
}

QuadratureRule w_quadrature(int m, double eps, int panels, int order) {
    if (m < 1) throw std::domain_error("w_quadrature: m must be >= 1");
    if (!(eps > 0.0 && eps <= 1e-8)) throw std::domain_error("w_quadrature: eps must be in (0, 1e-8]");
    const double lo = std::sqrt(chi2_quantile(0.5 * eps, m) / m);
    const double hi = std::sqrt(chi2_quantile(1.0 - 0.5 * eps, m) / m);
    // The first panel is split so that small w, where the x-window is widest,
    // gets its own boundary.
    std::vector<double> breaks;
    const double h = (hi - lo) / panels;
    breaks.push_back(lo);
    breaks.push_back(lo + 0.5 * h);
    for (int k = 1; k < panels; ++k) breaks.push_back(lo + k * h);
    breaks.push_back(hi);
    return gauss_legendre_breakpoints(breaks, hi - lo, order);
}

}  // namespace kgci::special
