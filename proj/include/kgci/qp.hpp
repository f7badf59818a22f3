#pragma once

#include <Eigen/Dense>

namespace kgci::qp {

/// minimize 0.5 x'Gx + a'x subject to C x >= b, with G positive definite.
struct Problem {
    Eigen::MatrixXd G;
    Eigen::VectorXd a;
    Eigen::MatrixXd C;
    Eigen::VectorXd b;
};

enum class Status { Optimal, Infeasible, NotConvex, IterationLimit };

struct Solution {
    Status status = Status::IterationLimit;
    Eigen::VectorXd x;
    /// One multiplier per row of C; zero for inactive rows.
    Eigen::VectorXd multipliers;
    double objective = 0.0;
    int iterations = 0;
};

/// Dual active-set method of Goldfarb and Idnani.
Solution solve(const Problem& problem, int max_iterations = 20000);

}  // namespace kgci::qp
