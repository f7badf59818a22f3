#pragma once
// Reference computations for the tests. Written directly from the defining
// formulas, sharing no code with the library.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

inline double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }
inline double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Adaptive Simpson on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol,
                      int depth = 50) {
    std::function<double(double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fmid, double fhi, double whole, int left) {
            const double mid = 0.5 * (lo + hi);
            const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
            const double flm = f(lm), frm = f(rm);
            const double l = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
            const double r = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
            if (left <= 0 || std::fabs(l + r - whole) <= 15.0 * tol) return l + r + (l + r - whole) / 15.0;
            return rec(lo, mid, flo, flm, fmid, l, left - 1) + rec(mid, hi, fmid, frm, fhi, r, left - 1);
        };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), depth);
}

/// Sum of adaptive Simpson over equal pieces of [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b, int pieces = 64,
                        double tol = 1e-15) {
    double acc = 0.0;
    for (int i = 0; i < pieces; ++i) {
        const double lo = a + (b - a) * i / pieces, hi = a + (b - a) * (i + 1) / pieces;
        acc += simpson(f, lo, hi, tol);
    }
    return acc;
}

/// Density of W = sqrt(Q/m), Q ~ chi^2_m, from the chi-square density by change of variables.
inline double w_density(double w, int m) {
    if (w <= 0.0) return 0.0;
    const double q = m * w * w;
    const double log_chi = (0.5 * m - 1.0) * std::log(q) - 0.5 * q - 0.5 * m * std::log(2.0) -
                           std::lgamma(0.5 * m);
    return std::exp(log_chi) * 2.0 * m * w;
}

/// Upper end of the W support used by the oracles.
inline double w_upper(int m) { return 1.0 + 12.0 / std::sqrt(static_cast<double>(m)); }

/// Student t CDF from the density.
inline double t_cdf(double t, int m) {
    const double c = std::exp(std::lgamma(0.5 * (m + 1)) - std::lgamma(0.5 * m)) / std::sqrt(m * kPi);
    auto f = [&](double u) { return c * std::pow(1.0 + u * u / m, -0.5 * (m + 1)); };
    if (t >= 0.0) return 0.5 + integrate(f, 0.0, t, 64, 1e-16);
    return 0.5 - integrate(f, 0.0, -t, 64, 1e-16);
}

/// Root of a monotone function by bisection.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
    const bool rising = f(hi) > f(lo);
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((f(mid) > 0.0) == rising) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

/// Inverse of a dense matrix by Gauss-Jordan elimination with partial pivoting.
inline std::vector<std::vector<double>> invert(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        std::swap(a[piv], a[col]);
        std::swap(inv[piv], inv[col]);
        const double p = a[col][col];
        for (std::size_t k = 0; k < n; ++k) {
            a[col][k] /= p;
            inv[col][k] /= p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            for (std::size_t k = 0; k < n; ++k) {
                a[r][k] -= f * a[col][k];
                inv[r][k] -= f * inv[col][k];
            }
        }
    }
    return inv;
}

/// Rows of the 2^3 factorial with columns 1, x1, x2, x3, x1x2, x1x3, x2x3.
inline std::vector<std::vector<double>> factorial_design() {
    std::vector<std::vector<double>> X;
    for (int k = 0; k < 8; ++k) {
        const double x1 = (k & 1) ? 1.0 : -1.0, x2 = (k & 2) ? 1.0 : -1.0, x3 = (k & 4) ? 1.0 : -1.0;
        X.push_back({1.0, x1, x2, x3, x1 * x2, x1 * x3, x2 * x3});
    }
    return X;
}

}  // namespace oracle
