#pragma once

#include <Eigen/Dense>

#include <vector>

namespace kgci::lp {

enum class Sense { LessEqual, GreaterEqual, Equal };

/// minimize cost'x subject to A x (sense) b, x >= 0.
struct Problem {
    Eigen::VectorXd cost;
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    std::vector<Sense> sense;
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Solution {
    Status status = Status::IterationLimit;
    Eigen::VectorXd x;
    double objective = 0.0;
    int pivots = 0;
};

/// Dense two-phase tableau simplex. Dantzig pricing, falling back to Bland's
/// rule after a run of degenerate pivots.
Solution solve(const Problem& problem, int max_pivots = 100000);

}  // namespace kgci::lp
