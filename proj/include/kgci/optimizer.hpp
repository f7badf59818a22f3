#pragma once

#include "kgci/performance.hpp"
#include "kgci/spline_family.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kgci::optim {

enum class BSign { None, NonNegative, NonPositive };

enum class Method {
    /// SQP with damped BFGS curvature, an L1 merit line search and
    /// second-order corrections. Falls back to SequentialLp when the
    /// linearized constraints are inconsistent.
    SequentialQp,
    /// Trust-region sequential linear programming on an exact L1 penalty,
    /// using analytic coverage gradients.
    SequentialLp,
    /// Derivative-free Nelder-Mead on the same exact penalty.
    NelderMead,
};

struct OptimizationConfig {
    double alpha = 0.05;
    /// Criterion mode: minimize xi * int (e - 1) + (e(0) - 1).
    std::optional<double> xi;
    /// With xi set, replace e(0) - 1 by the N(0, v^2)-weighted average of e - 1.
    std::optional<double> gaussian_v;
    /// Length-cap mode: minimize e(0) subject to max_gamma e(gamma) <= ell.
    std::optional<double> ell;
    double d = 0.0;
    int m = 1;
    double rho = 0.0;
    std::vector<double> knots_b;
    std::vector<double> knots_s;

    double coverage_tolerance = 1e-4;
    int max_iterations = 300;
    int multistart_count = 1;
    std::uint64_t seed = 20090901;
    /// Exact-penalty weight schedule.
    double penalty_initial = 100.0;
    double penalty_growth = 10.0;
    double penalty_max = 1e7;
    BSign b_sign = BSign::None;
    bool enforce_unimodal = true;
    /// With false only s is held unimodal; b may change direction more than once.
    bool unimodal_b = true;
    Method method = Method::SequentialQp;

    /// Coverage constraint grid: `gamma_step` on [0, d + gamma_margin], then
    /// 4 * gamma_step out to where the tail envelope drops below 1e-7.
    double gamma_step = 0.25;
    double gamma_margin = 10.0;

    performance::QuadratureSettings search_quadrature = performance::QuadratureSettings::fast();
    performance::QuadratureSettings certify_quadrature{};

    /// Throws ConfigError on invalid combinations.
    void validate() const;
};

struct OptimizationReport {
    IntervalFamily family;
    /// Mode A: criterion (1) value; mode B: e(0) - 1. The reverted family scores 0.
    double criterion_value = 0.0;
    double min_coverage_achieved = 0.0;
    double min_coverage_gamma = 0.0;
    double max_sel = 0.0;
    double max_sel_gamma = 0.0;
    double sel0 = 0.0;
    int iterations = 0;
    bool feasible = false;
    bool converged = false;
    int best_start = 0;
    ShapeReport shape;
};

OptimizationReport optimize(const OptimizationConfig& config);

/// Same search with b frozen at 0 (requires rho = 0).
OptimizationReport optimize_b_zero(const OptimizationConfig& config);

/// Gamma grid used for the coverage constraint.
std::vector<double> constraint_grid(const OptimizationConfig& config, double step);

/// Final measurement of a family with the certification quadrature.
OptimizationReport certify(const IntervalFamily& family, const OptimizationConfig& config);

std::string to_string(Method method);
std::string to_string(BSign sign);

}  // namespace kgci::optim
