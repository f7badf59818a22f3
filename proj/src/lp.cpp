#include "kgci/lp.hpp"

#include "kgci/errors.hpp"

#include <cmath>
#include <limits>

namespace kgci::lp {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-10;
constexpr int kDegenerateRunBeforeBland = 50;

class Tableau {
public:
    Tableau(int rows, int cols) : rows_(rows), cols_(cols), data_((rows + 1) * (cols + 1), 0.0) {}

    double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * (cols_ + 1) + c]; }
    double at(int r, int c) const { return data_[static_cast<std::size_t>(r) * (cols_ + 1) + c]; }
    double& rhs(int r) { return at(r, cols_); }
    /// Objective row is stored after the constraint rows.
    double& cost(int c) { return at(rows_, c); }
    double cost(int c) const { return at(rows_, c); }
    double& value() { return at(rows_, cols_); }

    void pivot(int pr, int pc) {
        const int width = cols_ + 1;
        double* prow = &data_[static_cast<std::size_t>(pr) * width];
        const double inv = 1.0 / prow[pc];
        for (int c = 0; c < width; ++c) prow[c] *= inv;
        prow[pc] = 1.0;
        for (int r = 0; r <= rows_; ++r) {
            if (r == pr) continue;
            double* row = &data_[static_cast<std::size_t>(r) * width];
            const double f = row[pc];
            if (f == 0.0) continue;
            for (int c = 0; c < width; ++c) row[c] -= f * prow[c];
            row[pc] = 0.0;
        }
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

private:
    int rows_;
    int cols_;
    std::vector<double> data_;
};

enum class RunResult { Optimal, Unbounded, IterationLimit };

// Simplex iterations on the tableau; columns with allowed[c] == false never enter.
RunResult run(Tableau& t, std::vector<int>& basis, const std::vector<bool>& allowed, int& pivots,
              int max_pivots) {
    int degenerate_run = 0;
    while (pivots < max_pivots) {
        const bool bland = degenerate_run >= kDegenerateRunBeforeBland;
        int enter = -1;
        double best = -kCostTol;
        for (int c = 0; c < t.cols(); ++c) {
            if (!allowed[c]) continue;
            const double rc = t.cost(c);
            if (rc < best) {
                enter = c;
                best = rc;
                if (bland) break;
            }
        }
        if (enter < 0) return RunResult::Optimal;

        int leave = -1;
        double ratio = std::numeric_limits<double>::infinity();
        for (int r = 0; r < t.rows(); ++r) {
            const double a = t.at(r, enter);
            if (a <= kPivotTol) continue;
            const double q = t.rhs(r) / a;
            if (q < ratio - 1e-12 || (q <= ratio + 1e-12 && leave >= 0 && basis[r] < basis[leave])) {
                ratio = q;
                leave = r;
            }
        }
        if (leave < 0) return RunResult::Unbounded;
        degenerate_run = (ratio <= 1e-12) ? degenerate_run + 1 : 0;
        t.pivot(leave, enter);
        basis[leave] = enter;
        ++pivots;
    }
    return RunResult::IterationLimit;
}

}  // namespace

Solution solve(const Problem& problem, int max_pivots) {
    const int m = static_cast<int>(problem.A.rows());
    const int n = static_cast<int>(problem.A.cols());
    if (problem.cost.size() != n || problem.b.size() != m || static_cast<int>(problem.sense.size()) != m) {
        throw Error("lp: inconsistent problem dimensions");
    }

    // Normalize to b >= 0 and count auxiliary columns.
    std::vector<double> sign(m, 1.0);
    std::vector<Sense> sense = problem.sense;
    int slacks = 0;
    int artificials = 0;
    for (int i = 0; i < m; ++i) {
        if (problem.b(i) < 0.0) {
            sign[i] = -1.0;
            if (sense[i] == Sense::LessEqual) sense[i] = Sense::GreaterEqual;
            else if (sense[i] == Sense::GreaterEqual) sense[i] = Sense::LessEqual;
        }
        if (sense[i] != Sense::Equal) ++slacks;
        if (sense[i] != Sense::LessEqual) ++artificials;
    }
    const int cols = n + slacks + artificials;
    Tableau t(m, cols);
    std::vector<int> basis(m, -1);
    std::vector<bool> is_artificial(cols, false);
    int next_slack = n;
    int next_art = n + slacks;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) t.at(i, j) = sign[i] * problem.A(i, j);
        t.rhs(i) = sign[i] * problem.b(i);
        switch (sense[i]) {
            case Sense::LessEqual:
                t.at(i, next_slack) = 1.0;
                basis[i] = next_slack++;
                break;
            case Sense::GreaterEqual:
                t.at(i, next_slack++) = -1.0;
                t.at(i, next_art) = 1.0;
                is_artificial[next_art] = true;
                basis[i] = next_art++;
                break;
            case Sense::Equal:
                t.at(i, next_art) = 1.0;
                is_artificial[next_art] = true;
                basis[i] = next_art++;
                break;
        }
    }

    Solution sol;
    std::vector<bool> allowed(cols, true);

    // Phase 1: minimize the sum of artificials.
    if (artificials > 0) {
        for (int c = 0; c <= cols; ++c) t.at(m, c) = 0.0;
        for (int i = 0; i < m; ++i) {
            if (!is_artificial[basis[i]]) continue;
            for (int c = 0; c <= cols; ++c) {
                if (!is_artificial[c] || c == cols) t.at(m, c) -= t.at(i, c);
            }
        }
        const auto r1 = run(t, basis, allowed, sol.pivots, max_pivots);
        if (r1 == RunResult::IterationLimit) {
            sol.status = Status::IterationLimit;
            return sol;
        }
        if (-t.value() > 1e-9 * (1.0 + problem.b.lpNorm<Eigen::Infinity>())) {
            sol.status = Status::Infeasible;
            return sol;
        }
        // Drive zero-level artificials out of the basis where possible.
        for (int i = 0; i < m; ++i) {
            if (!is_artificial[basis[i]]) continue;
            for (int c = 0; c < n + slacks; ++c) {
                if (std::fabs(t.at(i, c)) > 1e-9) {
                    t.pivot(i, c);
                    basis[i] = c;
                    break;
                }
            }
        }
        for (int c = 0; c < cols; ++c) {
            if (is_artificial[c]) allowed[c] = false;
        }
    }

    // Phase 2: reduced costs for the original objective.
    for (int c = 0; c <= cols; ++c) t.at(m, c) = 0.0;
    for (int j = 0; j < n; ++j) t.cost(j) = problem.cost(j);
    for (int i = 0; i < m; ++i) {
        const int bj = basis[i];
        const double cb = bj < n ? problem.cost(bj) : 0.0;
        if (cb == 0.0) continue;
        for (int c = 0; c <= cols; ++c) t.at(m, c) -= cb * t.at(i, c);
    }
    const auto r2 = run(t, basis, allowed, sol.pivots, max_pivots);
    if (r2 == RunResult::Unbounded) {
        sol.status = Status::Unbounded;
        return sol;
    }
    if (r2 == RunResult::IterationLimit) {
        sol.status = Status::IterationLimit;
        return sol;
    }
    sol.status = Status::Optimal;
    sol.x = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < m; ++i) {
        if (basis[i] < n) sol.x(basis[i]) = t.rhs(i);
    }
    sol.objective = problem.cost.dot(sol.x);
    return sol;
}

}  // namespace kgci::lp
