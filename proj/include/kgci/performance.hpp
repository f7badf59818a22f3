#pragma once

#include "kgci/special_functions.hpp"

#include <functional>
#include <span>
#include <vector>

namespace kgci {
class IntervalFamily;
}

namespace kgci::performance {

/// Node counts for the nested (w, x) quadrature.
struct QuadratureSettings {
    int w_panels = 24;
    int w_order = 16;
    double w_eps = 1e-10;
    /// x-panels follow the knots of b and s and are split further so none is
    /// longer than this.
    double x_max_panel = 0.5;
    int x_order = 16;
    /// Normal integrands are truncated this many standard deviations out.
    double normal_cut = 8.5;
    /// Panel length of the inner h-rule used by coverage_direct.
    double h_max_panel = 0.5;
    /// Upper limit on w-nodes times x-nodes.
    std::size_t max_nodes = 20'000'000;

    /// Coarser rule used inside the optimizer loop.
    static QuadratureSettings fast();
};

/// Any admissible pair (b, s): b odd with b = 0 beyond d, s = t(m) beyond d.
/// The callables are only queried on [0, d).
struct IntervalShape {
    double d = 0.0;
    int m = 1;
    double alpha = 0.05;
    double t_m = 0.0;
    std::function<double(double)> b;
    std::function<double(double)> s;
    /// Points in [0, d] (including both ends) between which b and s are smooth.
    std::vector<double> breakpoints;

    static IntervalShape from_family(const IntervalFamily& family);
    double eval_b(double x) const;
    double eval_s(double x) const;
};

/// Quadrature nodes for a given (d, m, breakpoints); independent of b, s and rho.
struct NodeLayout {
    std::vector<double> w;
    /// Quadrature weight times f_W(w).
    std::vector<double> w_weight;
    std::vector<double> x;
    std::vector<double> x_weight;
    int m = 1;
    double d = 0.0;
    double normal_cut = 8.5;

    static NodeLayout make(double d, int m, std::span<const double> breakpoints,
                           const QuadratureSettings& q);
};

/// Coverage and scaled expected length for tabulated b and s on a NodeLayout.
class Evaluator {
public:
    Evaluator(NodeLayout layout, double rho, double alpha);
    Evaluator(const IntervalShape& shape, double rho, const QuadratureSettings& q);

    /// b and s at the x-nodes of the layout.
    void set_values(std::span<const double> b_nodes, std::span<const double> s_nodes);

    double coverage(double gamma) const;
    /// Also returns d coverage / d b(x_k) and d coverage / d s(x_k).
    double coverage(double gamma, std::span<double> grad_b, std::span<double> grad_s) const;

    double sel(double gamma) const;
    /// sel(gamma) = 1 + sum_k g_k (s(x_k) - t(m)); returns g.
    std::vector<double> sel_weights(double gamma) const;

    /// E[Phi(dW - gamma) - Phi(-dW - gamma)], bounding |coverage - (1-alpha)|.
    double tail_envelope(double gamma) const;

    const NodeLayout& layout() const { return layout_; }
    double t_m() const { return t_m_; }
    double e_w() const { return e_w_; }
    double rho() const { return rho_; }
    double alpha() const { return alpha_; }

private:
    double coverage_impl(double gamma, double* grad_b, double* grad_s) const;

    NodeLayout layout_;
    double rho_;
    double alpha_;
    double t_m_;
    double e_w_;
    std::vector<double> b_;
    std::vector<double> s_;
};

double coverage(double gamma, const IntervalShape& shape, double rho,
                const QuadratureSettings& q = {});
double coverage(double gamma, const IntervalFamily& family, double rho,
                const QuadratureSettings& q = {});

/// Coverage from the full expectation over (h, w) without subtracting the
/// standard interval's integrand. Slower; used to cross-check `coverage`.
double coverage_direct(double gamma, const IntervalShape& shape, double rho,
                       const QuadratureSettings& q = {});

double sel(double gamma, const IntervalShape& shape, const QuadratureSettings& q = {});
double sel(double gamma, const IntervalFamily& family, const QuadratureSettings& q = {});

/// xi * int (e - 1) dgamma + (e(0) - 1), closed form in x.
double criterion_a(const IntervalShape& shape, double xi, const QuadratureSettings& q = {});
double criterion_a(const IntervalFamily& family, double xi, const QuadratureSettings& q = {});

/// xi * int (e - 1) dgamma + int (e - 1) phi(gamma; v) dgamma, by quadrature over gamma.
double criterion_b(const IntervalShape& shape, double xi, double v,
                   const QuadratureSettings& q = {});
double criterion_b(const IntervalFamily& family, double xi, double v,
                   const QuadratureSettings& q = {});

struct Extremum {
    double gamma = 0.0;
    double value = 0.0;
};

/// Maximum of e(gamma; s) on [0, gamma_max]: grid scan plus golden-section refinement.
Extremum max_sel(const IntervalFamily& family, double gamma_max, const QuadratureSettings& q = {},
                 double grid_step = 0.25);

struct MinCoverage {
    double gamma = 0.0;
    double value = 0.0;
    /// Last grid point and the bound on |coverage - (1 - alpha)| at that point.
    double envelope_gamma = 0.0;
    double envelope_bound = 0.0;
};

/// Minimum coverage over the grid, refined locally around the smallest grid value.
MinCoverage min_coverage(const IntervalFamily& family, double rho, std::span<const double> gamma_grid,
                         const QuadratureSettings& q = {});
MinCoverage min_coverage(const Evaluator& evaluator, std::span<const double> gamma_grid);

/// Uniform grid 0, step, ..., up to and including `upper`.
std::vector<double> uniform_grid(double upper, double step);

struct PerformanceCurve {
    std::vector<double> gamma_grid;
    std::vector<double> coverage;
    std::vector<double> sel;
    std::vector<double> sel_squared;
};

PerformanceCurve curves(const IntervalFamily& family, double rho, std::span<const double> gamma_grid,
                        const QuadratureSettings& q = {});

}  // namespace kgci::performance
