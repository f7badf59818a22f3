#include "kgci/spline_family.hpp"

#include "kgci/errors.hpp"
#include "kgci/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace kgci {

NaturalCubicSpline::NaturalCubicSpline(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
    const std::size_t n = knots_.size();
    if (n < 2 || values_.size() != n) throw KnotOrderError("spline needs >= 2 knots and matching values");
    for (std::size_t i = 1; i < n; ++i) {
        if (!(knots_[i] > knots_[i - 1])) throw KnotOrderError("spline knots must be strictly increasing");
    }
    second_.assign(n, 0.0);
    if (n == 2) return;

    // Tridiagonal system for the interior second derivatives (Thomas algorithm).
    const std::size_t k = n - 2;
    std::vector<double> diag(k), upper(k), rhs(k);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = knots_[i] - knots_[i - 1];
        const double h1 = knots_[i + 1] - knots_[i];
        diag[i - 1] = 2.0 * (h0 + h1);
        upper[i - 1] = h1;
        rhs[i - 1] = 6.0 * ((values_[i + 1] - values_[i]) / h1 - (values_[i] - values_[i - 1]) / h0);
    }
    for (std::size_t i = 1; i < k; ++i) {
        const double lower = knots_[i + 1] - knots_[i];
        const double f = lower / diag[i - 1];
        diag[i] -= f * upper[i - 1];
        rhs[i] -= f * rhs[i - 1];
    }
    second_[k] = rhs[k - 1] / diag[k - 1];
    for (std::size_t i = k - 1; i-- > 0;) {
        second_[i + 1] = (rhs[i] - upper[i] * second_[i + 2]) / diag[i];
    }
}

std::size_t NaturalCubicSpline::segment(double x) const {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    std::size_t i = (it == knots_.begin()) ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
    return std::min(i, knots_.size() - 2);
}

double NaturalCubicSpline::operator()(double x) const {
    const std::size_t i = segment(x);
    const double h = knots_[i + 1] - knots_[i];
    const double a = (knots_[i + 1] - x) / h;
    const double b = (x - knots_[i]) / h;
    return a * values_[i] + b * values_[i + 1] +
           ((a * a * a - a) * second_[i] + (b * b * b - b) * second_[i + 1]) * h * h / 6.0;
}

double NaturalCubicSpline::derivative(double x) const {
    const std::size_t i = segment(x);
    const double h = knots_[i + 1] - knots_[i];
    const double a = (knots_[i + 1] - x) / h;
    const double b = (x - knots_[i]) / h;
    return (values_[i + 1] - values_[i]) / h +
           (-(3.0 * a * a - 1.0) * second_[i] + (3.0 * b * b - 1.0) * second_[i + 1]) * h / 6.0;
}

Eigen::MatrixXd NaturalCubicSpline::basis(std::span<const double> knots, std::span<const double> xs) {
    const auto n = static_cast<Eigen::Index>(knots.size());
    Eigen::MatrixXd out(static_cast<Eigen::Index>(xs.size()), n);
    std::vector<double> kv(knots.begin(), knots.end());
    for (Eigen::Index j = 0; j < n; ++j) {
        std::vector<double> unit(knots.size(), 0.0);
        unit[static_cast<std::size_t>(j)] = 1.0;
        const NaturalCubicSpline spline(kv, unit);
        for (std::size_t i = 0; i < xs.size(); ++i) out(static_cast<Eigen::Index>(i), j) = spline(xs[i]);
    }
    return out;
}

Eigen::MatrixXd NaturalCubicSpline::derivative_basis(std::span<const double> knots,
                                                     std::span<const double> xs) {
    const auto n = static_cast<Eigen::Index>(knots.size());
    Eigen::MatrixXd out(static_cast<Eigen::Index>(xs.size()), n);
    std::vector<double> kv(knots.begin(), knots.end());
    for (Eigen::Index j = 0; j < n; ++j) {
        std::vector<double> unit(knots.size(), 0.0);
        unit[static_cast<std::size_t>(j)] = 1.0;
        const NaturalCubicSpline spline(kv, unit);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            out(static_cast<Eigen::Index>(i), j) = spline.derivative(xs[i]);
        }
    }
    return out;
}

namespace {

void check_knots(std::vector<double>& knots, double d, const char* name) {
    if (knots.size() < 2) {
        throw KnotOrderError(std::string(name) + ": need at least the knots 0 and d");
    }
    for (std::size_t i = 1; i < knots.size(); ++i) {
        if (!(knots[i] > knots[i - 1])) {
            throw KnotOrderError(std::string(name) + ": knots must be strictly increasing");
        }
    }
    const double tol = 1e-12 * std::max(1.0, d);
    if (std::fabs(knots.front()) > tol || std::fabs(knots.back() - d) > tol) {
        std::ostringstream msg;
        msg << name << ": knots must span [0, d] = [0, " << d << "]";
        throw KnotOrderError(msg.str());
    }
    knots.front() = 0.0;
    knots.back() = d;
}

void check_finite(const std::vector<double>& values, const char* name) {
    for (double v : values) {
        if (!std::isfinite(v)) throw Error(std::string(name) + ": values must be finite");
    }
}

}  // namespace

IntervalFamily IntervalFamily::build(double d, int m, double alpha, std::vector<double> knots_b,
                                     std::vector<double> values_b, std::vector<double> knots_s,
                                     std::vector<double> values_s) {
    if (!(d > 0.0)) throw Error("family: d must be positive");
    if (m < 1) throw Error("family: m must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("family: alpha must lie in (0,1)");
    check_knots(knots_b, d, "knots_b");
    check_knots(knots_s, d, "knots_s");
    if (values_b.size() + 2 != knots_b.size()) {
        throw Error("family: values_b must hold one value per interior knot of knots_b");
    }
    if (values_s.size() + 1 != knots_s.size()) {
        throw Error("family: values_s must hold one value per knot of knots_s except d");
    }
    check_finite(values_b, "values_b");
    check_finite(values_s, "values_s");

    IntervalFamily f;
    f.d_ = d;
    f.m_ = m;
    f.alpha_ = alpha;
    f.t_m_ = special::t_quantile(m, alpha);
    f.knots_b_ = std::move(knots_b);
    f.values_b_ = std::move(values_b);
    f.knots_s_ = std::move(knots_s);
    f.values_s_ = std::move(values_s);

    std::vector<double> full_b;
    full_b.reserve(f.knots_b_.size());
    full_b.push_back(0.0);
    full_b.insert(full_b.end(), f.values_b_.begin(), f.values_b_.end());
    full_b.push_back(0.0);
    f.b_ = NaturalCubicSpline(f.knots_b_, std::move(full_b));

    std::vector<double> full_s = f.values_s_;
    full_s.push_back(f.t_m_);
    f.s_ = NaturalCubicSpline(f.knots_s_, std::move(full_s));

    for (int i = 0; i < kShapeGridPoints; ++i) {
        const double x = d * i / (kShapeGridPoints - 1);
        const double s = f.s_(x);
        if (!(s > 0.0)) {
            std::ostringstream msg;
            msg << "s(" << x << ") = " << s << " is not positive";
            throw NonPositiveS(msg.str());
        }
    }
    return f;
}

IntervalFamily IntervalFamily::reverted(double d, int m, double alpha, std::vector<double> knots_b,
                                        std::vector<double> knots_s) {
    const double t = special::t_quantile(m, alpha);
    std::vector<double> vb(knots_b.size() >= 2 ? knots_b.size() - 2 : 0, 0.0);
    std::vector<double> vs(knots_s.empty() ? 0 : knots_s.size() - 1, t);
    return build(d, m, alpha, std::move(knots_b), std::move(vb), std::move(knots_s), std::move(vs));
}

double IntervalFamily::eval_b(double x) const {
    const double ax = std::fabs(x);
    if (ax >= d_) return 0.0;
    const double v = b_(ax);
    return x < 0.0 ? -v : v;
}

double IntervalFamily::eval_s(double x) const {
    const double ax = std::fabs(x);
    if (ax >= d_) return t_m_;
    return s_(ax);
}

std::vector<double> IntervalFamily::breakpoints() const {
    std::vector<double> out = knots_b_;
    out.insert(out.end(), knots_s_.begin(), knots_s_.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double unimodal_violation(std::span<const double> y) {
    const std::size_t n = y.size();
    if (n < 3) return 0.0;
    std::vector<double> left(n, 0.0), right(n, 0.0);
    double run_max = y[0];
    for (std::size_t q = 1; q < n; ++q) {
        left[q] = std::max(left[q - 1], run_max - y[q]);
        run_max = std::max(run_max, y[q]);
    }
    run_max = y[n - 1];
    for (std::size_t q = n - 1; q-- > 0;) {
        right[q] = std::max(right[q + 1], run_max - y[q]);
        run_max = std::max(run_max, y[q]);
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < n; ++q) best = std::min(best, std::max(left[q], right[q]));
    return best;
}

ShapeReport shape_report(const IntervalFamily& family, int grid_points) {
    if (grid_points < 100) throw Error("shape_report: grid_points must be >= 100");
    std::vector<double> s(grid_points), b(grid_points), neg_b(grid_points);
    double scale = family.t_m();
    double min_s = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_points; ++i) {
        const double x = family.d() * i / (grid_points - 1);
        s[i] = family.eval_s(x);
        b[i] = family.eval_b(x);
        neg_b[i] = -b[i];
        min_s = std::min(min_s, s[i]);
        scale = std::max({scale, std::fabs(s[i]), std::fabs(b[i])});
    }
    ShapeReport r;
    // The optimizer imposes monotonicity at sample points only; cubic pieces may dip
    // between them by far less than this.
    const double tol = 1e-6 * scale;
    r.s_violation = unimodal_violation(s);
    r.b_violation = std::min(unimodal_violation(b), unimodal_violation(neg_b));
    r.s_unimodal = r.s_violation <= tol;
    r.b_unimodal_on_0d = r.b_violation <= tol;
    r.s_positive = min_s > 0.0;
    r.max_violation = std::max({r.s_violation, r.b_violation, r.s_positive ? 0.0 : -min_s});
    return r;
}

}  // namespace kgci
