#include "kgci/performance.hpp"

#include "kgci/errors.hpp"
#include "kgci/parallel.hpp"
#include "kgci/spline_family.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace kgci::performance {

using special::normal_cdf;
using special::normal_pdf;

QuadratureSettings QuadratureSettings::fast() {
    QuadratureSettings q;
    q.w_panels = 32;
    q.w_order = 8;
    q.x_max_panel = 1.0;
    q.x_order = 8;
    return q;
}

IntervalShape IntervalShape::from_family(const IntervalFamily& family) {
    auto shared = std::make_shared<const IntervalFamily>(family);
    IntervalShape shape;
    shape.d = family.d();
    shape.m = family.m();
    shape.alpha = family.alpha();
    shape.t_m = family.t_m();
    shape.b = [shared](double x) { return shared->eval_b(x); };
    shape.s = [shared](double x) { return shared->eval_s(x); };
    shape.breakpoints = family.breakpoints();
    return shape;
}

double IntervalShape::eval_b(double x) const {
    const double ax = std::fabs(x);
    if (ax >= d) return 0.0;
    const double v = b(ax);
    return x < 0.0 ? -v : v;
}

double IntervalShape::eval_s(double x) const {
    const double ax = std::fabs(x);
    return ax >= d ? t_m : s(ax);
}

NodeLayout NodeLayout::make(double d, int m, std::span<const double> breakpoints,
                            const QuadratureSettings& q) {
    if (!(d > 0.0)) throw Error("node layout: d must be positive");
    NodeLayout layout;
    layout.m = m;
    layout.d = d;
    layout.normal_cut = q.normal_cut;

    const auto wrule = special::w_quadrature(m, q.w_eps, q.w_panels, q.w_order);
    layout.w = wrule.nodes;
    layout.w_weight.resize(wrule.size());
    for (std::size_t i = 0; i < wrule.size(); ++i) {
        layout.w_weight[i] = wrule.weights[i] * special::w_pdf(wrule.nodes[i], m);
    }

    std::vector<double> breaks{0.0, d};
    for (double b : breakpoints) {
        if (b > 0.0 && b < d) breaks.push_back(b);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    const auto xrule = special::gauss_legendre_breakpoints(breaks, q.x_max_panel, q.x_order);
    layout.x = xrule.nodes;
    layout.x_weight = xrule.weights;

    if (layout.w.size() * layout.x.size() > q.max_nodes) {
        std::ostringstream msg;
        msg << "quadrature needs " << layout.w.size() << " x " << layout.x.size()
            << " nodes, above the budget of " << q.max_nodes;
        throw QuadratureBudgetExceeded(msg.str());
    }
    return layout;
}

Evaluator::Evaluator(NodeLayout layout, double rho, double alpha)
    : layout_(std::move(layout)),
      rho_(rho),
      alpha_(alpha),
      t_m_(special::t_quantile(layout_.m, alpha)),
      e_w_(special::e_w(layout_.m)),
      b_(layout_.x.size(), 0.0),
      s_(layout_.x.size(), t_m_) {
    if (!(std::fabs(rho) < 1.0)) throw Error("rho must lie in (-1, 1)");
}

Evaluator::Evaluator(const IntervalShape& shape, double rho, const QuadratureSettings& q)
    : Evaluator(NodeLayout::make(shape.d, shape.m, shape.breakpoints, q), rho, shape.alpha) {
    for (std::size_t k = 0; k < layout_.x.size(); ++k) {
        b_[k] = shape.b(layout_.x[k]);
        s_[k] = shape.s(layout_.x[k]);
    }
}

void Evaluator::set_values(std::span<const double> b_nodes, std::span<const double> s_nodes) {
    if (b_nodes.size() != b_.size() || s_nodes.size() != s_.size()) {
        throw Error("evaluator: node value arrays have the wrong length");
    }
    std::copy(b_nodes.begin(), b_nodes.end(), b_.begin());
    std::copy(s_nodes.begin(), s_nodes.end(), s_.begin());
}

double Evaluator::coverage(double gamma) const { return coverage_impl(gamma, nullptr, nullptr); }

double Evaluator::coverage(double gamma, std::span<double> grad_b, std::span<double> grad_s) const {
    if (grad_b.size() != b_.size() || grad_s.size() != s_.size()) {
        throw Error("evaluator: gradient arrays have the wrong length");
    }
    std::fill(grad_b.begin(), grad_b.end(), 0.0);
    std::fill(grad_s.begin(), grad_s.end(), 0.0);
    return coverage_impl(gamma, grad_b.data(), grad_s.data());
}

// Coverage = 1 - alpha + E over (W, H) of the difference between the
// conditional coverage of J(b,s) and of the standard interval. The
// difference vanishes for |H| >= dW, so only x = H/W in (-d, d) contributes.
double Evaluator::coverage_impl(double gamma, double* grad_b, double* grad_s) const {
    const auto& xs = layout_.x;
    const auto& xw = layout_.x_weight;
    const double r = std::sqrt(1.0 - rho_ * rho_);
    const double inv_r = 1.0 / r;
    const double cut = layout_.normal_cut;
    const double t = t_m_;
    double total = 0.0;

    for (std::size_t iw = 0; iw < layout_.w.size(); ++iw) {
        const double w = layout_.w[iw];
        const double ww = layout_.w_weight[iw];
        double inner = 0.0;
        for (int sign = 1; sign >= -1; sign -= 2) {
            // phi(sign*w*x - gamma) is negligible unless sign*w*x lies within gamma +/- cut.
            const double c0 = sign > 0 ? (gamma - cut) / w : (-gamma - cut) / w;
            const double c1 = sign > 0 ? (gamma + cut) / w : (-gamma + cut) / w;
            const auto first = std::lower_bound(xs.begin(), xs.end(), c0) - xs.begin();
            const auto last = std::upper_bound(xs.begin(), xs.end(), c1) - xs.begin();
            for (auto k = first; k < last; ++k) {
                const double h = sign * w * xs[k];
                const double bx = sign * b_[k];
                const double sx = s_[k];
                if (bx == 0.0 && sx == t && grad_b == nullptr) continue;
                const double shift = -rho_ * (h - gamma);
                const double up = (w * (bx + sx) + shift) * inv_r;
                const double lo = (w * (bx - sx) + shift) * inv_r;
                const double ref_up = (w * t + shift) * inv_r;
                const double ref_lo = (-w * t + shift) * inv_r;
                const double diff = 0.5 * (std::erfc(-up / special::kSqrt2) - std::erfc(-lo / special::kSqrt2) -
                                           std::erfc(-ref_up / special::kSqrt2) +
                                           std::erfc(-ref_lo / special::kSqrt2));
                const double weight = xw[k] * w * normal_pdf(h - gamma);
                inner += weight * diff;
                if (grad_b != nullptr) {
                    const double pu = normal_pdf(up);
                    const double pl = normal_pdf(lo);
                    const double scale = ww * weight * w * inv_r;
                    grad_b[k] += sign * scale * (pu - pl);
                    grad_s[k] += scale * (pu + pl);
                }
            }
        }
        total += ww * inner;
    }
    return (1.0 - alpha_) + total;
}

std::vector<double> Evaluator::sel_weights(double gamma) const {
    const auto& xs = layout_.x;
    std::vector<double> g(xs.size(), 0.0);
    const double cut = layout_.normal_cut;
    const double norm = 1.0 / (t_m_ * e_w_);
    for (std::size_t iw = 0; iw < layout_.w.size(); ++iw) {
        const double w = layout_.w[iw];
        const double scale = norm * layout_.w_weight[iw] * w * w;
        for (int sign = 1; sign >= -1; sign -= 2) {
            const double c0 = sign > 0 ? (gamma - cut) / w : (-gamma - cut) / w;
            const double c1 = sign > 0 ? (gamma + cut) / w : (-gamma + cut) / w;
            const auto first = std::lower_bound(xs.begin(), xs.end(), c0) - xs.begin();
            const auto last = std::upper_bound(xs.begin(), xs.end(), c1) - xs.begin();
            for (auto k = first; k < last; ++k) {
                g[k] += scale * layout_.x_weight[k] * normal_pdf(sign * w * xs[k] - gamma);
            }
        }
    }
    return g;
}

double Evaluator::sel(double gamma) const {
    const auto g = sel_weights(gamma);
    double acc = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) acc += g[k] * (s_[k] - t_m_);
    return 1.0 + acc;
}

double Evaluator::tail_envelope(double gamma) const {
    double acc = 0.0;
    for (std::size_t iw = 0; iw < layout_.w.size(); ++iw) {
        const double dw = layout_.d * layout_.w[iw];
        acc += layout_.w_weight[iw] * (normal_cdf(dw - gamma) - normal_cdf(-dw - gamma));
    }
    return acc;
}

double coverage(double gamma, const IntervalShape& shape, double rho, const QuadratureSettings& q) {
    return Evaluator(shape, rho, q).coverage(gamma);
}

double coverage(double gamma, const IntervalFamily& family, double rho, const QuadratureSettings& q) {
    return coverage(gamma, IntervalShape::from_family(family), rho, q);
}

double coverage_direct(double gamma, const IntervalShape& shape, double rho,
                       const QuadratureSettings& q) {
    if (!(std::fabs(rho) < 1.0)) throw Error("rho must lie in (-1, 1)");
    const auto wrule = special::w_quadrature(shape.m, q.w_eps, q.w_panels, q.w_order);
    const double r = std::sqrt(1.0 - rho * rho);
    const double lo_h = gamma - q.normal_cut;
    const double hi_h = gamma + q.normal_cut;
    double total = 0.0;
    for (std::size_t iw = 0; iw < wrule.size(); ++iw) {
        const double w = wrule.nodes[iw];
        std::vector<double> breaks{lo_h, hi_h};
        for (double b : shape.breakpoints) {
            for (double h : {b * w, -b * w}) {
                if (h > lo_h && h < hi_h) breaks.push_back(h);
            }
        }
        std::sort(breaks.begin(), breaks.end());
        breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
        const auto hrule = special::gauss_legendre_breakpoints(breaks, q.h_max_panel, q.x_order);
        const double inner = hrule.integrate([&](double h) {
            const double x = h / w;
            const double bx = shape.eval_b(x);
            const double sx = shape.eval_s(x);
            const double shift = -rho * (h - gamma);
            return (normal_cdf((w * (bx + sx) + shift) / r) - normal_cdf((w * (bx - sx) + shift) / r)) *
                   normal_pdf(h - gamma);
        });
        total += wrule.weights[iw] * special::w_pdf(w, shape.m) * inner;
    }
    return total;
}

double sel(double gamma, const IntervalShape& shape, const QuadratureSettings& q) {
    return Evaluator(shape, 0.0, q).sel(gamma);
}

double sel(double gamma, const IntervalFamily& family, const QuadratureSettings& q) {
    return sel(gamma, IntervalShape::from_family(family), q);
}

double criterion_a(const IntervalShape& shape, double xi, const QuadratureSettings& q) {
    if (!(xi >= 0.0)) throw Error("criterion_a: xi must be non-negative");
    const auto layout = NodeLayout::make(shape.d, shape.m, shape.breakpoints, q);
    const double norm = 2.0 / (shape.t_m * special::e_w(shape.m));
    double acc = 0.0;
    for (std::size_t k = 0; k < layout.x.size(); ++k) {
        const double x = layout.x[k];
        acc += layout.x_weight[k] * (shape.s(x) - shape.t_m) * (xi + special::lemma1(x, shape.m));
    }
    return norm * acc;
}

double criterion_a(const IntervalFamily& family, double xi, const QuadratureSettings& q) {
    return criterion_a(IntervalShape::from_family(family), xi, q);
}

double criterion_b(const IntervalShape& shape, double xi, double v, const QuadratureSettings& q) {
    if (!(v > 0.0)) throw Error("criterion_b: v must be positive");
    const Evaluator ev(shape, 0.0, q);
    const double w_max = ev.layout().w.back();
    const double gamma_end = shape.d * w_max + q.normal_cut;
    // Resolve phi(gamma; v) near the origin, then unit panels out to where e - 1 vanishes.
    std::vector<double> breaks{0.0};
    const double near = std::min(q.normal_cut * v, gamma_end);
    for (int i = 1; i <= 16; ++i) breaks.push_back(near * i / 16.0);
    if (gamma_end > near) breaks.push_back(gamma_end);
    const auto grule = special::gauss_legendre_breakpoints(breaks, 1.0, q.x_order);
    std::vector<double> excess(grule.size());
    parallel_for(grule.size(), [&](std::size_t i) { excess[i] = ev.sel(grule.nodes[i]) - 1.0; });
    double acc = 0.0;
    for (std::size_t i = 0; i < grule.size(); ++i) {
        const double g = grule.nodes[i];
        acc += grule.weights[i] * excess[i] * (xi + normal_pdf(g / v) / v);
    }
    return 2.0 * acc;
}

double criterion_b(const IntervalFamily& family, double xi, double v, const QuadratureSettings& q) {
    return criterion_b(IntervalShape::from_family(family), xi, v, q);
}

namespace {

template <typename F>
Extremum golden_section_min(F&& f, double a, double b, int iterations = 50) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int i = 0; i < iterations && b - a > 1e-10; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return fc < fd ? Extremum{c, fc} : Extremum{d, fd};
}

}  // namespace

std::vector<double> uniform_grid(double upper, double step) {
    if (!(step > 0.0) || upper < 0.0) throw Error("uniform_grid: need step > 0 and upper >= 0");
    const auto count = static_cast<std::size_t>(std::floor(upper / step + 1e-9)) + 1;
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) grid[i] = step * static_cast<double>(i);
    if (upper - grid.back() > 1e-9 * std::max(1.0, upper)) grid.push_back(upper);
    return grid;
}

Extremum max_sel(const IntervalFamily& family, double gamma_max, const QuadratureSettings& q,
                 double grid_step) {
    if (!(gamma_max > family.d())) throw Error("max_sel: gamma_max must exceed d");
    const Evaluator ev(IntervalShape::from_family(family), 0.0, q);
    const auto grid = uniform_grid(gamma_max, grid_step);
    std::vector<double> vals(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { vals[i] = ev.sel(grid[i]); });
    const auto best = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
    const double a = grid[best == 0 ? 0 : best - 1];
    const double b = grid[std::min(best + 1, grid.size() - 1)];
    Extremum top{grid[best], vals[best]};
    if (b > a) {
        const auto refined = golden_section_min([&](double g) { return -ev.sel(g); }, a, b);
        if (-refined.value > top.value) top = {refined.gamma, -refined.value};
    }
    return top;
}

MinCoverage min_coverage(const Evaluator& ev, std::span<const double> grid) {
    if (grid.empty()) throw Error("min_coverage: empty gamma grid");
    std::vector<double> vals(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { vals[i] = ev.coverage(grid[i]); });
    const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    MinCoverage out;
    out.gamma = grid[best];
    out.value = vals[best];
    const double a = grid[best == 0 ? 0 : best - 1];
    const double b = grid[std::min(best + 1, grid.size() - 1)];
    if (b > a) {
        const auto refined = golden_section_min([&](double g) { return ev.coverage(g); }, a, b, 40);
        if (refined.value < out.value) {
            out.gamma = refined.gamma;
            out.value = refined.value;
        }
    }
    out.envelope_gamma = grid.back();
    out.envelope_bound = ev.tail_envelope(grid.back());
    return out;
}

MinCoverage min_coverage(const IntervalFamily& family, double rho, std::span<const double> grid,
                         const QuadratureSettings& q) {
    const Evaluator ev(IntervalShape::from_family(family), rho, q);
    return min_coverage(ev, grid);
}

PerformanceCurve curves(const IntervalFamily& family, double rho, std::span<const double> grid,
                        const QuadratureSettings& q) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 0.0 || (i > 0 && !(grid[i] > grid[i - 1]))) {
            throw Error("curves: gamma grid must be increasing and non-negative");
        }
    }
    const Evaluator ev(IntervalShape::from_family(family), rho, q);
    PerformanceCurve c;
    c.gamma_grid.assign(grid.begin(), grid.end());
    c.coverage.resize(grid.size());
    c.sel.resize(grid.size());
    c.sel_squared.resize(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        c.coverage[i] = ev.coverage(grid[i]);
        c.sel[i] = ev.sel(grid[i]);
        c.sel_squared[i] = c.sel[i] * c.sel[i];
    });
    return c;
}

}  // namespace kgci::performance
