#include "kgci/theory_bounds.hpp"

#include "kgci/errors.hpp"
#include "kgci/special_functions.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace kgci::bounds {

namespace {

// Monotone decreasing in lambda; zero at lambda(m).
double log_gap(double lambda, int m, double t, double ew) {
    const double k = std::sqrt(2.0 / special::kPi) * (1.0 - lambda) * t * ew / lambda;
    return std::log(k) / (m / 2.0 + 1.0) - std::log1p(t * t / m);
}

void check_args(int m, double alpha) {
    if (m < 1) throw Error("lambda_m: m must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("lambda_m: alpha must lie in (0,1)");
}

}  // namespace

double lambda_residual(double lambda, int m, double alpha) {
    const double t = special::t_quantile(m, alpha);
    const double k = std::sqrt(2.0 / special::kPi) * (1.0 - lambda) * t * special::e_w(m) / lambda;
    const double inner = std::pow(k, 1.0 / (m / 2.0 + 1.0)) - 1.0;
    if (inner < 0.0) return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(m) * std::sqrt(inner) - t;
}

double lambda_m(int m, double alpha) {
    check_args(m, alpha);
    const double t = special::t_quantile(m, alpha);
    const double ew = special::e_w(m);
    double lo = 1e-300;
    double hi = 1.0 - 1e-16;
    if (!(log_gap(lo, m, t, ew) > 0.0 && log_gap(hi, m, t, ew) < 0.0)) {
        std::ostringstream msg;
        msg << "lambda_m: no sign change on (0,1) for m = " << m;
        throw RootNotBracketed(msg.str());
    }
    // Bisect in log(lambda) until the bracket collapses in double precision.
    for (int i = 0; i < 2000; ++i) {
        const double mid = (lo < 1e-3) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (log_gap(mid, m, t, ew) > 0.0) lo = mid;
        else hi = mid;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    }
    return 0.5 * (lo + hi);
}

double lambda_m_secant(int m, double alpha) {
    check_args(m, alpha);
    const double t = special::t_quantile(m, alpha);
    const double ew = special::e_w(m);
    auto f = [&](double y) { return log_gap(1.0 / (1.0 + std::exp(-y)), m, t, ew); };
    // y = logit(lambda); f is smooth and decreasing in y.
    double y0 = -2.0;
    double y1 = 0.0;
    double f0 = f(y0);
    double f1 = f(y1);
    for (int i = 0; i < 200 && std::fabs(f1) > 1e-15; ++i) {
        const double y2 = y1 - f1 * (y1 - y0) / (f1 - f0);
        y0 = y1;
        f0 = f1;
        y1 = y2;
        f1 = f(y1);
    }
    if (!std::isfinite(y1)) throw RootNotBracketed("lambda_m_secant: iteration diverged");
    return 1.0 / (1.0 + std::exp(-y1));
}

double s_lambda(double x, int m, double alpha, double d) {
    const double t = special::t_quantile(m, alpha);
    const double ax = std::fabs(x);
    if (ax >= d) return t;
    return std::sqrt(1.0 + ax * ax / m) * t;
}

BoundResult theorem3_bound(int m, double alpha, double d, const performance::QuadratureSettings& q) {
    if (!(d > 0.0)) throw Error("theorem3_bound: d must be positive");
    BoundResult r;
    r.m = m;
    r.alpha = alpha;
    r.d = d;
    r.lambda_m = lambda_m(m, alpha);

    performance::IntervalShape shape;
    shape.d = d;
    shape.m = m;
    shape.alpha = alpha;
    shape.t_m = special::t_quantile(m, alpha);
    shape.b = [](double) { return 0.0; };
    shape.s = [m, alpha, d](double x) { return s_lambda(x, m, alpha, d); };
    shape.breakpoints = {0.0, d};

    r.nu_m = performance::coverage(0.0, shape, 0.0, q) - (1.0 - alpha);
    r.eta_m = r.nu_m * (1.0 - r.lambda_m) / r.lambda_m;
    r.lower_bound = 1.0 - r.eta_m;
    return r;
}

}  // namespace kgci::bounds
