#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace kgci {

/// Interpolating cubic spline with zero second derivative at both end knots.
class NaturalCubicSpline {
public:
    NaturalCubicSpline() = default;
    NaturalCubicSpline(std::vector<double> knots, std::vector<double> values);

    double operator()(double x) const;
    double derivative(double x) const;

    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& values() const { return values_; }

    /// Row i holds the weights that map knot values to the spline value at xs[i].
    static Eigen::MatrixXd basis(std::span<const double> knots, std::span<const double> xs);
    static Eigen::MatrixXd derivative_basis(std::span<const double> knots,
                                            std::span<const double> xs);

private:
    std::size_t segment(double x) const;

    std::vector<double> knots_;
    std::vector<double> values_;
    std::vector<double> second_;
};

/// The pair (b, s) defining J(b,s). b is the odd extension of a natural
/// spline on [0,d] with b(0) = b(d) = 0; s is a natural spline on [0,d] with
/// s(d) = t(m). Beyond d, b = 0 and s = t(m).
class IntervalFamily {
public:
    /// Empty family; only useful as a placeholder before assignment.
    IntervalFamily() = default;

    /// values_b holds b at the interior knots of knots_b; values_s holds s at
    /// every knot of knots_s except the last.
    static IntervalFamily build(double d, int m, double alpha, std::vector<double> knots_b,
                                std::vector<double> values_b, std::vector<double> knots_s,
                                std::vector<double> values_s);

    /// b = 0, s = t(m): J(b,s) coincides with the standard interval.
    static IntervalFamily reverted(double d, int m, double alpha, std::vector<double> knots_b,
                                   std::vector<double> knots_s);

    double eval_b(double x) const;
    double eval_s(double x) const;

    double d() const { return d_; }
    int m() const { return m_; }
    double alpha() const { return alpha_; }
    double t_m() const { return t_m_; }
    const std::vector<double>& knots_b() const { return knots_b_; }
    const std::vector<double>& values_b() const { return values_b_; }
    const std::vector<double>& knots_s() const { return knots_s_; }
    const std::vector<double>& values_s() const { return values_s_; }

    /// Sorted union of both knot sets; the functions are smooth between them.
    std::vector<double> breakpoints() const;

private:
    double d_ = 0.0;
    int m_ = 0;
    double alpha_ = 0.0;
    double t_m_ = 0.0;
    std::vector<double> knots_b_;
    std::vector<double> values_b_;
    std::vector<double> knots_s_;
    std::vector<double> values_s_;
    NaturalCubicSpline b_;
    NaturalCubicSpline s_;
};

inline constexpr int kShapeGridPoints = 2048;

struct ShapeReport {
    bool s_unimodal = true;
    bool b_unimodal_on_0d = true;
    bool s_positive = true;
    /// Largest monotonicity violation (function units) of the better mode
    /// placement, over both b and s, plus any non-positivity of s.
    double max_violation = 0.0;
    double s_violation = 0.0;
    double b_violation = 0.0;
};

/// Unimodality here is weak: monotone and constant functions qualify. s must
/// rise then fall; b may have its single extremum of either sign.
ShapeReport shape_report(const IntervalFamily& family, int grid_points = kShapeGridPoints);

/// Smallest amount by which `values` fails to be non-decreasing then
/// non-increasing, minimized over the mode position.
double unimodal_violation(std::span<const double> values);

}  // namespace kgci
