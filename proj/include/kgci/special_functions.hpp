#pragma once

#include <span>
#include <vector>

namespace kgci::special {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kPi = 3.14159265358979323846;

double normal_pdf(double x);
double normal_cdf(double x);
/// Inverse of normal_cdf on (0,1).
double normal_quantile(double p);

/// Regularized incomplete gamma functions P(a,x) and Q(a,x) = 1 - P(a,x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

/// Regularized incomplete beta I_x(a,b). `one_minus_x` is passed separately so
/// callers can avoid cancellation when x is close to 1.
double beta_inc(double a, double b, double x, double one_minus_x);

double chi2_cdf(double q, int m);
double chi2_sf(double q, int m);
double chi2_pdf(double q, int m);
/// q with P(Q <= q) = p for Q ~ chi^2_m. Bisection in log(q).
double chi2_quantile(double p, int m);

/// P(|T| <= t) for T ~ t_m.
double t_two_sided_prob(double t, int m);
/// t(m) with P(-t(m) <= T <= t(m)) = 1 - alpha.
double t_quantile(int m, double alpha);

/// Density of W = sigma_hat / sigma ~ sqrt(Q/m), Q ~ chi^2_m.
double w_pdf(double w, int m);
/// E(W) = sqrt(2/m) Gamma((m+1)/2) / Gamma(m/2).
double e_w(int m);

/// int_0^inf phi(w x) w^2 f_W(w) dw in closed form.
double lemma1(double x, int m);
/// int_0^inf phi(tt w) phi(w x) w^2 f_W(w) dw in closed form.
double lemma2(double tt, double x, int m);

/// Nodes and weights on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussLegendre& gauss_legendre(int order);

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    double lower = 0.0;
    double upper = 0.0;

    std::size_t size() const { return nodes.size(); }

    template <typename F>
    double integrate(F&& f) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
        return acc;
    }
};

/// Composite Gauss-Legendre rule with `panels` equal panels on [a, b].
QuadratureRule gauss_legendre_panels(double a, double b, int panels, int order);

/// Composite rule over consecutive breakpoints; each breakpoint interval is
/// split further so no panel is longer than `max_panel`.
QuadratureRule gauss_legendre_breakpoints(std::span<const double> breakpoints, double max_panel,
                                          int order);

/// Rule over the truncated support of f_W: the f_W mass outside [lower, upper]
/// is below eps. Weights do not include the density.
QuadratureRule w_quadrature(int m, double eps, int panels = 24, int order = 16);

}  // namespace kgci::special
