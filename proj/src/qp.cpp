#include "kgci/qp.hpp"

#include "kgci/errors.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace kgci::qp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kEps = 1e-14;

class Factors {
public:
    Factors(MatrixXd J, int n) : J_(std::move(J)), R_(MatrixXd::Zero(n, n)), n_(n) {}

    int q() const { return q_; }
    const MatrixXd& J() const { return J_; }

    VectorXd primal_direction(const VectorXd& d) const {
        return J_.rightCols(n_ - q_) * d.tail(n_ - q_);
    }

    VectorXd dual_direction(const VectorXd& d) const {
        if (q_ == 0) return VectorXd();
        return R_.topLeftCorner(q_, q_).triangularView<Eigen::Upper>().solve(d.head(q_));
    }

    // d = J' n for the new normal; returns false when n depends on the active normals.
    bool add(VectorXd d) {
        for (int j = n_ - 1; j > q_; --j) {
            const double a = d(j - 1);
            const double b = d(j);
            if (b == 0.0) continue;
            const double h = std::hypot(a, b);
            const double c = a / h;
            const double s = b / h;
            d(j - 1) = h;
            d(j) = 0.0;
            for (int k = 0; k < n_; ++k) {
                const double x = J_(k, j - 1);
                const double y = J_(k, j);
                J_(k, j - 1) = c * x + s * y;
                J_(k, j) = -s * x + c * y;
            }
        }
        if (std::fabs(d(q_)) <= kEps * std::max(1.0, d.head(q_ + 1).norm())) return false;
        R_.col(q_).head(q_ + 1) = d.head(q_ + 1);
        ++q_;
        return true;
    }

    void drop(int l) {
        for (int k = l; k + 1 < q_; ++k) R_.col(k) = R_.col(k + 1);
        R_.col(q_ - 1).setZero();
        for (int j = l; j + 1 < q_; ++j) {
            const double a = R_(j, j);
            const double b = R_(j + 1, j);
            if (b == 0.0) continue;
            const double h = std::hypot(a, b);
            const double c = a / h;
            const double s = b / h;
            for (int k = j; k + 1 < q_; ++k) {
                const double x = R_(j, k);
                const double y = R_(j + 1, k);
                R_(j, k) = c * x + s * y;
                R_(j + 1, k) = -s * x + c * y;
            }
            R_(j + 1, j) = 0.0;
            for (int k = 0; k < n_; ++k) {
                const double x = J_(k, j);
                const double y = J_(k, j + 1);
                J_(k, j) = c * x + s * y;
                J_(k, j + 1) = -s * x + c * y;
            }
        }
        --q_;
    }

private:
    MatrixXd J_;
    MatrixXd R_;
    int n_;
    int q_ = 0;
};

}  // namespace

Solution solve(const Problem& p, int max_iterations) {
    const int n = static_cast<int>(p.G.rows());
    const int m = static_cast<int>(p.C.rows());
    if (p.G.cols() != n || p.a.size() != n || p.C.cols() != n || p.b.size() != m) {
        throw Error("qp: inconsistent problem dimensions");
    }
    Solution sol;
    sol.multipliers = VectorXd::Zero(m);
    const Eigen::LLT<MatrixXd> llt(p.G);
    if (llt.info() != Eigen::Success) {
        sol.status = Status::NotConvex;
        return sol;
    }
    const MatrixXd L = llt.matrixL();
    Factors f(L.transpose().triangularView<Eigen::Upper>().solve(MatrixXd::Identity(n, n)), n);
    VectorXd x = -llt.solve(p.a);

    std::vector<int> active;
    std::vector<double> u;
    std::vector<bool> is_active(m, false);
    std::vector<double> row_norm(m);
    for (int i = 0; i < m; ++i) row_norm[i] = p.C.row(i).norm();

    auto slack = [&](int i) { return p.C.row(i).dot(x) - p.b(i); };

    while (sol.iterations < max_iterations) {
        int pc = -1;
        double worst = 0.0;
        for (int i = 0; i < m; ++i) {
            if (is_active[i] || row_norm[i] == 0.0) continue;
            const double s = slack(i) / row_norm[i];
            const double tol = 1e-12 * (1.0 + std::fabs(p.b(i)) / row_norm[i] + x.norm());
            if (s < -tol && s < worst) {
                worst = s;
                pc = i;
            }
        }
        if (pc < 0) {
            sol.status = Status::Optimal;
            break;
        }
        for (int i = 0; i < m; ++i) {
            if (row_norm[i] == 0.0 && p.b(i) > 1e-12) {
                sol.status = Status::Infeasible;
                return sol;
            }
        }
        const VectorXd np = p.C.row(pc).transpose();
        std::vector<double> uplus = u;
        double up = 0.0;
        double sp = slack(pc);
        bool added = false;
        while (!added) {
            if (++sol.iterations > max_iterations) {
                sol.status = Status::IterationLimit;
                sol.x = x;
                return sol;
            }
            const VectorXd d = f.J().transpose() * np;
            const VectorXd z = f.primal_direction(d);
            const VectorXd r = f.dual_direction(d);
            double t1 = std::numeric_limits<double>::infinity();
            int l = -1;
            for (int j = 0; j < f.q(); ++j) {
                if (r(j) > kEps) {
                    const double ratio = uplus[j] / r(j);
                    if (ratio < t1) {
                        t1 = ratio;
                        l = j;
                    }
                }
            }
            double t2 = std::numeric_limits<double>::infinity();
            const double zn = z.dot(np);
            if (z.norm() > kEps * np.norm() && zn > 0.0) t2 = -sp / zn;
            if (!std::isfinite(t1) && !std::isfinite(t2)) {
                sol.status = Status::Infeasible;
                sol.x = x;
                return sol;
            }
            const double t = std::min(t1, t2);
            if (std::isfinite(t2)) x += t * z;
            for (int j = 0; j < f.q(); ++j) uplus[j] -= t * r(j);
            up += t;
            if (t2 <= t1) {
                if (!f.add(d)) {
                    sol.status = Status::Infeasible;
                    sol.x = x;
                    return sol;
                }
                active.push_back(pc);
                is_active[pc] = true;
                uplus.push_back(up);
                u = uplus;
                added = true;
            } else {
                is_active[active[l]] = false;
                active.erase(active.begin() + l);
                uplus.erase(uplus.begin() + l);
                f.drop(l);
                sp = slack(pc);
            }
        }
    }
    if (sol.status != Status::Optimal) {
        sol.x = x;
        return sol;
    }
    sol.x = x;
    for (std::size_t k = 0; k < active.size(); ++k) sol.multipliers(active[k]) = u[k];
    sol.objective = 0.5 * x.dot(p.G * x) + p.a.dot(x);
    return sol;
}

}  // namespace kgci::qp
