#pragma once

#include "kgci/regression.hpp"
#include "kgci/spline_family.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace kgci::mc {

/// Stateless generator: every (key, counter) pair maps to one 64-bit word.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    std::uint64_t next();
    /// Uniform on (0, 1), never exactly 0 or 1.
    double uniform();
    double normal();
    /// Gamma(shape, 1) by Marsaglia and Tsang.
    double gamma(double shape);

    static std::uint64_t mix(std::uint64_t x);
    static std::uint64_t derive(std::uint64_t key, std::uint64_t index);

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

enum class Procedure { Standard, Naive, Kg };

struct SimulationSpec {
    Procedure procedure = Procedure::Standard;
    /// Required for Procedure::Kg.
    std::shared_ptr<const IntervalFamily> family;
    double gamma = 0.0;
    double rho = 0.0;
    int m = 1;
    /// Pivotal results do not depend on v11 and v22; they only scale raw lengths.
    double v11 = 1.0;
    double v22 = 1.0;
    double alpha = 0.05;
    /// Pre-test size of the naive procedure.
    double test_size = 0.05;
    std::uint64_t reps = 1'000'000;
    std::uint64_t seed = 1;
};

struct SimulationReport {
    double gamma = 0.0;
    std::uint64_t reps = 0;
    std::uint64_t covered = 0;
    std::uint64_t lower_misses = 0;
    std::uint64_t upper_misses = 0;
    double coverage_hat = 0.0;
    double se_coverage = 0.0;
    /// Length over the expected length of the standard interval.
    double sel_hat = 0.0;
    double se_sel = 0.0;
    /// theta below the interval.
    double lower_miss_rate = 0.0;
    double se_lower = 0.0;
    /// theta above the interval.
    double upper_miss_rate = 0.0;
    double se_upper = 0.0;
};

/// One draw in pivotal units: G = (Theta_hat - theta)/(sigma sqrt v11),
/// H = tau_hat/(sigma sqrt v22), W = sigma_hat/sigma.
struct PivotalDraw {
    double g = 0.0;
    double h = 0.0;
    double w = 0.0;
};

PivotalDraw draw(CounterRng& rng, double gamma, double rho, int m);

/// Interval in G units: theta is covered iff |G - centre| <= half.
struct PivotalInterval {
    double centre = 0.0;
    double half = 0.0;
};

/// The procedure of a spec with its quantiles computed once.
class IntervalRule {
public:
    explicit IntervalRule(const SimulationSpec& spec);
    PivotalInterval operator()(const PivotalDraw& x) const;

private:
    Procedure procedure_;
    std::shared_ptr<const IntervalFamily> family_;
    double rho_;
    int m_;
    double t_m_;
    double t_m1_;
    double t_test_;
};

SimulationReport simulate(const SimulationSpec& spec);

/// spec.gamma is replaced by each grid value; grid point i uses seed derive(spec.seed, i).
std::vector<SimulationReport> sweep(const SimulationSpec& spec, std::span<const double> gamma_grid);

/// Slow path: draws y = X beta + sigma eps and builds the interval with the
/// regression routines. beta is chosen so that tau = gamma sigma sqrt(v22).
SimulationReport simulate_raw(const regression::RegressionProblem& problem, const SimulationSpec& spec,
                              double sigma = 1.0);

}  // namespace kgci::mc
