#include "kgci/optimizer.hpp"

#include "kgci/errors.hpp"
#include "kgci/lp.hpp"
#include "kgci/parallel.hpp"
#include "kgci/qp.hpp"
#include "kgci/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace kgci::optim {

using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace perf = kgci::performance;

namespace {

constexpr double kEnvelopeCut = 1e-7;
constexpr int kPositivityPoints = 129;
constexpr int kShapePointsPerInterval = 32;
constexpr double kCoverageFeasTol = 1e-7;
// Search target sits this far below 1 - alpha so rows that cannot move do not pin the multipliers.
constexpr double kCoverageSlack = 1e-8;

bool knots_ok(const std::vector<double>& k, double d) {
    if (k.size() < 2) return false;
    if (std::fabs(k.front()) > 1e-12 || std::fabs(k.back() - d) > 1e-9 * std::max(1.0, d)) return false;
    for (std::size_t i = 1; i < k.size(); ++i) {
        if (!(k[i] > k[i - 1])) return false;
    }
    return true;
}

std::vector<double> knot_union(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> u(a);
    u.insert(u.end(), b.begin(), b.end());
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    return u;
}

// Weight of (s(x) - t) in the criterion, per unit of x.
double criterion_density(const OptimizationConfig& cfg, double x) {
    const double xi = cfg.xi.value_or(0.0);
    if (cfg.gaussian_v) {
        const double c = std::sqrt(1.0 + *cfg.gaussian_v * *cfg.gaussian_v);
        return xi + special::lemma1(x / c, cfg.m) / c;
    }
    return xi + special::lemma1(x, cfg.m);
}

struct LinearRows {
    // rows A v >= lo
    MatrixXd A;
    VectorXd lo;

    void append(const MatrixXd& rows, const VectorXd& bounds) {
        if (rows.rows() == 0) return;
        MatrixXd nA(A.rows() + rows.rows(), rows.cols());
        VectorXd nlo(lo.size() + bounds.size());
        if (A.rows() > 0) {
            nA.topRows(A.rows()) = A;
            nlo.head(lo.size()) = lo;
        }
        nA.bottomRows(rows.rows()) = rows;
        nlo.tail(bounds.size()) = bounds;
        A = std::move(nA);
        lo = std::move(nlo);
    }
};

struct Mode {
    double x = 0.0;
    double sign = 1.0;
};

// Search in the knot values: v = [interior b values, s values except the last].
class SearchProblem {
public:
    SearchProblem(const OptimizationConfig& cfg, bool freeze_b)
        : cfg_(cfg),
          freeze_b_(freeze_b),
          t_(special::t_quantile(cfg.m, cfg.alpha)),
          evaluator_(perf::NodeLayout::make(cfg.d, cfg.m, knot_union(cfg.knots_b, cfg.knots_s),
                                            cfg.search_quadrature),
                     cfg.rho, cfg.alpha) {
        const auto& xs = evaluator_.layout().x;
        const auto& xw = evaluator_.layout().x_weight;
        nx_ = static_cast<int>(xs.size());
        nb_ = freeze_b_ ? 0 : static_cast<int>(cfg.knots_b.size()) - 2;
        ns_ = static_cast<int>(cfg.knots_s.size()) - 1;

        const MatrixXd full_b = NaturalCubicSpline::basis(cfg.knots_b, xs);
        Bb_ = nb_ > 0 ? MatrixXd(full_b.middleCols(1, nb_)) : MatrixXd::Zero(nx_, 0);
        const MatrixXd full_s = NaturalCubicSpline::basis(cfg.knots_s, xs);
        Bs_ = full_s.leftCols(ns_);
        s_offset_ = t_ * full_s.col(ns_);

        grid_ = constraint_grid(cfg, cfg.gamma_step);

        // Linear objective in s at the nodes.
        VectorXd ow = VectorXd::Zero(nx_);
        if (cfg.ell) {
            const auto g0 = evaluator_.sel_weights(0.0);
            for (int k = 0; k < nx_; ++k) ow(k) = g0[k];
        } else {
            const double norm = 2.0 / (t_ * special::e_w(cfg.m));
            for (int k = 0; k < nx_; ++k) ow(k) = norm * xw[k] * criterion_density(cfg, xs[k]);
        }
        grad_f_ = VectorXd::Zero(dim());
        grad_f_.tail(ns_) = Bs_.transpose() * ow;
        f_const_ = ow.dot(s_offset_ - VectorXd::Constant(nx_, t_));

        build_base_rows();
    }

    int dim() const { return nb_ + ns_; }
    double t() const { return t_; }
    const std::vector<double>& grid() const { return grid_; }
    const LinearRows& rows() const { return rows_; }

    VectorXd reverted() const {
        VectorXd v = VectorXd::Zero(dim());
        v.tail(ns_).setConstant(t_);
        return v;
    }

    double objective(const VectorXd& v) const { return grad_f_.dot(v) + f_const_; }
    const VectorXd& objective_gradient() const { return grad_f_; }

    IntervalFamily family(const VectorXd& v) const {
        std::vector<double> vb(cfg_.knots_b.size() - 2, 0.0);
        for (int i = 0; i < nb_; ++i) vb[i] = v(i);
        std::vector<double> vs(v.data() + nb_, v.data() + nb_ + ns_);
        return IntervalFamily::build(cfg_.d, cfg_.m, cfg_.alpha, cfg_.knots_b, vb, cfg_.knots_s, vs);
    }

    /// Coverage at every grid point; J receives the Jacobian when non-null.
    VectorXd coverage(const VectorXd& v, MatrixXd* J) {
        set(v);
        const std::size_t ng = grid_.size();
        VectorXd c(ng);
        if (J != nullptr) J->resize(static_cast<Eigen::Index>(ng), dim());
        parallel_for(ng, [&](std::size_t j) {
            if (J == nullptr) {
                c(j) = evaluator_.coverage(grid_[j]);
                return;
            }
            std::vector<double> gb(nx_), gs(nx_);
            c(j) = evaluator_.coverage(grid_[j], gb, gs);
            const Eigen::Map<const VectorXd> mb(gb.data(), nx_), ms(gs.data(), nx_);
            if (nb_ > 0) J->row(j).head(nb_) = (Bb_.transpose() * mb).transpose();
            J->row(j).tail(ns_) = (Bs_.transpose() * ms).transpose();
        });
        return c;
    }

    /// Fix the modes of s and b and require monotone pieces on either side.
    void add_shape_rows(const Mode& s_mode, const Mode& b_mode) {
        append_monotone(cfg_.knots_s, s_mode, false);
        if (cfg_.unimodal_b && nb_ > 0) append_monotone(cfg_.knots_b, b_mode, true);
    }

private:
    void set(const VectorXd& v) {
        VectorXd b = nb_ > 0 ? VectorXd(Bb_ * v.head(nb_)) : VectorXd::Zero(nx_);
        VectorXd s = Bs_ * v.tail(ns_) + s_offset_;
        evaluator_.set_values(std::span<const double>(b.data(), nx_), std::span<const double>(s.data(), nx_));
    }

    void build_base_rows() {
        std::vector<double> pts(kPositivityPoints);
        for (int i = 0; i < kPositivityPoints; ++i) pts[i] = cfg_.d * i / (kPositivityPoints - 1);
        // s(x) >= floor
        {
            const MatrixXd full = NaturalCubicSpline::basis(cfg_.knots_s, pts);
            MatrixXd A = MatrixXd::Zero(kPositivityPoints, dim());
            A.rightCols(ns_) = full.leftCols(ns_);
            VectorXd lo = VectorXd::Constant(kPositivityPoints, 1e-3 * t_) - t_ * full.col(ns_);
            rows_.append(A, lo);
        }
        if (nb_ > 0 && cfg_.b_sign != BSign::None) {
            const double sg = cfg_.b_sign == BSign::NonNegative ? 1.0 : -1.0;
            const MatrixXd full = NaturalCubicSpline::basis(cfg_.knots_b, pts);
            MatrixXd A = MatrixXd::Zero(kPositivityPoints, dim());
            A.leftCols(nb_) = sg * full.middleCols(1, nb_);
            rows_.append(A, VectorXd::Zero(kPositivityPoints));
        }
        if (cfg_.ell) {
            // e(gamma) <= ell on the near grid.
            const auto near = perf::uniform_grid(cfg_.d + cfg_.gamma_margin, cfg_.gamma_step);
            MatrixXd A = MatrixXd::Zero(static_cast<Eigen::Index>(near.size()), dim());
            VectorXd lo(static_cast<Eigen::Index>(near.size()));
            std::vector<VectorXd> g(near.size());
            parallel_for(near.size(), [&](std::size_t j) {
                const auto w = evaluator_.sel_weights(near[j]);
                g[j] = Eigen::Map<const VectorXd>(w.data(), nx_);
            });
            for (std::size_t j = 0; j < near.size(); ++j) {
                A.row(j).tail(ns_) = -(Bs_.transpose() * g[j]).transpose();
                lo(j) = 1.0 - *cfg_.ell + g[j].dot(s_offset_ - VectorXd::Constant(nx_, t_));
            }
            rows_.append(A, lo);
        }
    }

    void append_monotone(const std::vector<double>& knots, const Mode& mode, bool is_b) {
        std::vector<double> pts;
        for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
            for (int j = 0; j <= kShapePointsPerInterval; ++j) {
                if (j == kShapePointsPerInterval && i + 2 < knots.size()) continue;
                pts.push_back(knots[i] + (knots[i + 1] - knots[i]) * j / kShapePointsPerInterval);
            }
        }
        const MatrixXd D = NaturalCubicSpline::derivative_basis(knots, pts);
        const double tol = 1e-9 * std::max(1.0, cfg_.d);
        std::vector<int> keep;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (std::fabs(pts[i] - mode.x) > tol) keep.push_back(static_cast<int>(i));
        }
        MatrixXd A = MatrixXd::Zero(static_cast<Eigen::Index>(keep.size()), dim());
        VectorXd lo = VectorXd::Zero(static_cast<Eigen::Index>(keep.size()));
        for (std::size_t r = 0; r < keep.size(); ++r) {
            const int i = keep[r];
            const double dir = (pts[i] < mode.x ? 1.0 : -1.0) * mode.sign;
            if (is_b) {
                A.row(r).head(nb_) = dir * D.row(i).segment(1, nb_);
            } else {
                A.row(r).tail(ns_) = dir * D.row(i).head(ns_);
                lo(r) = -dir * t_ * D(i, ns_);
            }
        }
        rows_.append(A, lo);
    }

    const OptimizationConfig& cfg_;
    bool freeze_b_;
    double t_;
    perf::Evaluator evaluator_;
    int nx_ = 0;
    int nb_ = 0;
    int ns_ = 0;
    MatrixXd Bb_;
    MatrixXd Bs_;
    VectorXd s_offset_;
    VectorXd grad_f_;
    double f_const_ = 0.0;
    std::vector<double> grid_;
    LinearRows rows_;
};

struct Violation {
    double coverage = 0.0;  // sum of shortfalls
    double linear = 0.0;
    double max_coverage = 0.0;
    double max_linear = 0.0;
    double total() const { return coverage + linear; }
};

Violation violation(const SearchProblem& sp, const VectorXd& v, const VectorXd& c, double level) {
    Violation out;
    for (Eigen::Index j = 0; j < c.size(); ++j) {
        const double e = std::max(0.0, level - c(j));
        out.coverage += e;
        out.max_coverage = std::max(out.max_coverage, e);
    }
    const auto& rows = sp.rows();
    if (rows.A.rows() > 0) {
        const VectorXd r = rows.lo - rows.A * v;
        for (Eigen::Index l = 0; l < r.size(); ++l) {
            const double e = std::max(0.0, r(l));
            out.linear += e;
            out.max_linear = std::max(out.max_linear, e);
        }
    }
    return out;
}

struct RunResult {
    VectorXd v;
    int iterations = 0;
    bool converged = false;
    bool feasible = false;
};

bool feasible_enough(const Violation& viol, double t) {
    return viol.max_coverage <= kCoverageFeasTol && viol.max_linear <= 1e-7 * std::max(1.0, t);
}

RunResult run_slp(SearchProblem& sp, const OptimizationConfig& cfg, VectorXd v, int& budget) {
    const int n = sp.dim();
    const double level = 1.0 - cfg.alpha - kCoverageSlack;
    const double t = sp.t();
    const double r_max = t;
    const double r_min = 1e-9 * t;
    double radius = 0.1 * t;
    double mu = cfg.penalty_initial;
    RunResult res;

    MatrixXd J;
    VectorXd c = sp.coverage(v, &J);
    const auto& rows = sp.rows();
    const int ng = static_cast<int>(c.size());
    const int nl = static_cast<int>(rows.A.rows());

    while (true) {
        bool stalled = false;
        while (budget > 0) {
            Violation viol = violation(sp, v, c, level);
            const double merit = sp.objective(v) + mu * viol.total();

            // Variables: u (n, delta = radius * (u - 1)), z (coverage elastic), y (linear elastic).
            lp::Problem lpp;
            const int nv = n + ng + nl;
            const int nr = ng + nl + n;
            lpp.cost = VectorXd::Zero(nv);
            lpp.cost.head(n) = radius * sp.objective_gradient();
            lpp.cost.segment(n, ng + nl).setConstant(mu);
            lpp.A = MatrixXd::Zero(nr, nv);
            lpp.b = VectorXd::Zero(nr);
            lpp.sense.assign(nr, lp::Sense::GreaterEqual);
            for (int j = 0; j < ng; ++j) {
                lpp.A.row(j).head(n) = radius * J.row(j);
                lpp.A(j, n + j) = 1.0;
                lpp.b(j) = level - c(j) + radius * J.row(j).sum();
            }
            for (int l = 0; l < nl; ++l) {
                lpp.A.row(ng + l).head(n) = radius * rows.A.row(l);
                lpp.A(ng + l, n + ng + l) = 1.0;
                lpp.b(ng + l) = rows.lo(l) - rows.A.row(l).dot(v) + radius * rows.A.row(l).sum();
            }
            for (int i = 0; i < n; ++i) {
                lpp.A(ng + nl + i, i) = 1.0;
                lpp.b(ng + nl + i) = 2.0;
                lpp.sense[ng + nl + i] = lp::Sense::LessEqual;
            }
            const auto sol = lp::solve(lpp);
            if (sol.status != lp::Status::Optimal) {
                radius *= 0.5;
                if (radius < r_min) {
                    stalled = true;
                    break;
                }
                continue;
            }
            const VectorXd u = sol.x.head(n);
            const VectorXd step = radius * (u - VectorXd::Ones(n));
            const double model = sp.objective(v) + sp.objective_gradient().dot(step) +
                                 mu * sol.x.segment(n, ng + nl).sum();
            const double pred = merit - model;
            if (pred <= 1e-10 * (1.0 + std::fabs(merit))) {
                res.converged = true;
                break;
            }
            --budget;
            ++res.iterations;
            const VectorXd trial = v + step;
            MatrixXd Jt;
            const VectorXd ct = sp.coverage(trial, &Jt);
            const Violation vt = violation(sp, trial, ct, level);
            const double merit_t = sp.objective(trial) + mu * vt.total();
            const double ratio = (merit - merit_t) / pred;
            const bool on_boundary = (u.array() < 1e-9).any() || (u.array() > 2.0 - 1e-9).any();
            if (ratio >= 0.1) {
                v = trial;
                c = ct;
                J = std::move(Jt);
            }
            if (ratio < 0.25) {
                radius *= 0.25;
            } else if (ratio > 0.75 && on_boundary) {
                radius = std::min(2.0 * radius, r_max);
            }
            if (radius < r_min) {
                stalled = true;
                break;
            }
        }
        const Violation viol = violation(sp, v, c, level);
        res.feasible = feasible_enough(viol, t);
        if (res.feasible || mu >= cfg.penalty_max || budget <= 0) {
            if (stalled) res.converged = true;
            break;
        }
        mu = std::min(mu * cfg.penalty_growth, cfg.penalty_max);
        radius = std::max(radius, 1e-3 * t);
    }
    res.v = std::move(v);
    return res;
}

// Quadratic subproblem at v: linearized coverage and linear rows, a box of
// half-width `box`, and rhs corrections `shift` for the coverage rows.
qp::Solution sqp_subproblem(const SearchProblem& sp, const VectorXd& v, const VectorXd& c, const MatrixXd& J,
                            const MatrixXd& B, double level, double box, const VectorXd& shift) {
    const int n = sp.dim();
    const auto& rows = sp.rows();
    const int ng = static_cast<int>(c.size());
    const int nl = static_cast<int>(rows.A.rows());
    qp::Problem p;
    p.G = B;
    p.a = sp.objective_gradient();
    p.C = MatrixXd::Zero(ng + nl + 2 * n, n);
    p.b = VectorXd::Zero(ng + nl + 2 * n);
    for (int j = 0; j < ng; ++j) {
        const double norm = J.row(j).norm();
        const double rhs = level - c(j) - shift(j);
        // Rows with no sensitivity carry no information; they are satisfied or hopeless.
        if (norm < 1e-13) continue;
        p.C.row(j) = J.row(j) / norm;
        p.b(j) = rhs / norm;
    }
    if (nl > 0) {
        p.C.middleRows(ng, nl) = rows.A;
        p.b.segment(ng, nl) = rows.lo - rows.A * v;
    }
    for (int i = 0; i < n; ++i) {
        p.C(ng + nl + 2 * i, i) = 1.0;
        p.b(ng + nl + 2 * i) = -box;
        p.C(ng + nl + 2 * i + 1, i) = -1.0;
        p.b(ng + nl + 2 * i + 1) = -box;
    }
    auto sol = qp::solve(p);
    if (sol.status == qp::Status::Optimal) {
        // Undo the row scaling so multipliers refer to the coverage values.
        for (int j = 0; j < ng; ++j) {
            const double norm = J.row(j).norm();
            if (norm >= 1e-13) sol.multipliers(j) /= norm;
        }
    }
    return sol;
}

RunResult run_sqp(SearchProblem& sp, const OptimizationConfig& cfg, VectorXd v, int& budget) {
    const int n = sp.dim();
    const double level = 1.0 - cfg.alpha - kCoverageSlack;
    const double t = sp.t();
    const VectorXd& g = sp.objective_gradient();
    const int ng = static_cast<int>(sp.grid().size());
    RunResult res;

    MatrixXd J;
    VectorXd c = sp.coverage(v, &J);
    const double b0 = std::max(g.norm(), 1e-8) / (0.05 * t);
    MatrixXd B = b0 * MatrixXd::Identity(n, n);
    double box = 0.5 * t;
    double mu = cfg.penalty_initial;
    const VectorXd no_shift = VectorXd::Zero(ng);

    while (budget > 0) {
        auto sol = sqp_subproblem(sp, v, c, J, B, level, box, no_shift);
        if (sol.status != qp::Status::Optimal) {
            // Linearization inconsistent: continue with the elastic LP method.
            RunResult tail = run_slp(sp, cfg, v, budget);
            tail.iterations += res.iterations;
            return tail;
        }
        const VectorXd step = sol.x;
        const VectorXd lambda = sol.multipliers.head(ng + static_cast<int>(sp.rows().A.rows()));
        if (lambda.size() > 0) mu = std::min(cfg.penalty_max, std::max(mu, 1.5 * lambda.maxCoeff()));

        const Violation viol = violation(sp, v, c, level);
        const double merit = sp.objective(v) + mu * viol.total();
        const double descent = g.dot(step) - mu * viol.total();
        if (step.lpNorm<Eigen::Infinity>() <= 1e-10 * t ||
            (std::fabs(g.dot(step)) <= 1e-12 && feasible_enough(viol, t))) {
            res.converged = true;
            break;
        }

        auto merit_at = [&](const VectorXd& x, VectorXd& cx, MatrixXd& Jx) {
            cx = sp.coverage(x, &Jx);
            --budget;
            ++res.iterations;
            return sp.objective(x) + mu * violation(sp, x, cx, level).total();
        };

        VectorXd v_new = v + step;
        VectorXd c_new;
        MatrixXd J_new;
        double merit_new = merit_at(v_new, c_new, J_new);
        bool accepted = merit_new <= merit + 1e-4 * descent;
        if (!accepted && budget > 0) {
            // Second-order correction for the curvature of the coverage rows.
            const VectorXd shift = c_new - c - J * step;
            auto soc = sqp_subproblem(sp, v, c, J, B, level, box, shift);
            if (soc.status == qp::Status::Optimal) {
                VectorXd v_soc = v + soc.x;
                VectorXd c_soc;
                MatrixXd J_soc;
                const double merit_soc = merit_at(v_soc, c_soc, J_soc);
                if (merit_soc <= merit + 1e-4 * descent) {
                    v_new = std::move(v_soc);
                    c_new = std::move(c_soc);
                    J_new = std::move(J_soc);
                    accepted = true;
                }
            }
        }
        double a = 1.0;
        while (!accepted && budget > 0 && a > 1e-3) {
            a *= 0.3;
            v_new = v + a * step;
            merit_new = merit_at(v_new, c_new, J_new);
            accepted = merit_new <= merit + 1e-4 * a * descent;
        }
        if (!accepted) {
            // Model is poor: restart the curvature estimate inside a smaller box.
            B = b0 * MatrixXd::Identity(n, n);
            box *= 0.25;
            if (box < 1e-9 * t) break;
            continue;
        }

        // Damped BFGS on the Lagrangian; only the coverage rows are nonlinear.
        const VectorXd s = v_new - v;
        VectorXd y = -(J_new - J).transpose() * sol.multipliers.head(ng);
        const VectorXd Bs = B * s;
        const double sBs = s.dot(Bs);
        const double sy = s.dot(y);
        if (sBs > 0.0) {
            if (sy < 0.2 * sBs) {
                const double theta = 0.8 * sBs / (sBs - sy);
                y = theta * y + (1.0 - theta) * Bs;
            }
            B += y * y.transpose() / s.dot(y) - Bs * Bs.transpose() / sBs;
        }
        v = std::move(v_new);
        c = std::move(c_new);
        J = std::move(J_new);
    }
    res.feasible = feasible_enough(violation(sp, v, c, level), t);
    res.v = std::move(v);
    return res;
}

// Shape violation used only by the derivative-free method.
double shape_penalty(const SearchProblem& sp, const VectorXd& v, const OptimizationConfig& cfg) {
    if (!cfg.enforce_unimodal) return 0.0;
    try {
        const auto rep = shape_report(sp.family(v), 512);
        return rep.s_violation + rep.b_violation;
    } catch (const NonPositiveS&) {
        return 0.0;  // covered by the positivity rows
    }
}

RunResult run_nelder_mead(SearchProblem& sp, const OptimizationConfig& cfg, VectorXd v, int& budget) {
    const int n = sp.dim();
    const double level = 1.0 - cfg.alpha - kCoverageSlack;
    const double t = sp.t();
    RunResult res;
    double mu = cfg.penalty_initial;
    while (true) {
        auto penalty = [&](const VectorXd& x) {
            const VectorXd c = sp.coverage(x, nullptr);
            const Violation viol = violation(sp, x, c, level);
            return sp.objective(x) + mu * (viol.total() + shape_penalty(sp, x, cfg));
        };
        std::vector<VectorXd> simplex(n + 1, v);
        for (int i = 0; i < n; ++i) simplex[i + 1](i) += 0.05 * t;
        std::vector<double> fv(n + 1);
        for (int i = 0; i <= n; ++i) fv[i] = penalty(simplex[i]);
        int evals = 0;
        const int max_evals = std::max(1, budget) * (n + 1);
        while (evals < max_evals) {
            std::vector<int> order(n + 1);
            for (int i = 0; i <= n; ++i) order[i] = i;
            std::sort(order.begin(), order.end(), [&](int a, int b) { return fv[a] < fv[b]; });
            std::vector<VectorXd> s2;
            std::vector<double> f2;
            for (int i : order) {
                s2.push_back(simplex[i]);
                f2.push_back(fv[i]);
            }
            simplex = std::move(s2);
            fv = std::move(f2);
            if (std::fabs(fv[n] - fv[0]) <= 1e-12 * (1.0 + std::fabs(fv[0]))) {
                res.converged = true;
                break;
            }
            VectorXd centroid = VectorXd::Zero(n);
            for (int i = 0; i < n; ++i) centroid += simplex[i];
            centroid /= n;
            const VectorXd xr = centroid + (centroid - simplex[n]);
            const double fr = penalty(xr);
            ++evals;
            if (fr < fv[0]) {
                const VectorXd xe = centroid + 2.0 * (centroid - simplex[n]);
                const double fe = penalty(xe);
                ++evals;
                if (fe < fr) {
                    simplex[n] = xe;
                    fv[n] = fe;
                } else {
                    simplex[n] = xr;
                    fv[n] = fr;
                }
            } else if (fr < fv[n - 1]) {
                simplex[n] = xr;
                fv[n] = fr;
            } else {
                const bool outside = fr < fv[n];
                const VectorXd xc = outside ? VectorXd(centroid + 0.5 * (xr - centroid))
                                            : VectorXd(centroid + 0.5 * (simplex[n] - centroid));
                const double fc = penalty(xc);
                ++evals;
                if (fc < std::min(fr, fv[n])) {
                    simplex[n] = xc;
                    fv[n] = fc;
                } else {
                    for (int i = 1; i <= n; ++i) {
                        simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
                        fv[i] = penalty(simplex[i]);
                        ++evals;
                    }
                }
            }
        }
        const auto best = std::min_element(fv.begin(), fv.end()) - fv.begin();
        v = simplex[best];
        res.iterations += evals;
        budget -= evals / (n + 1);
        const VectorXd c = sp.coverage(v, nullptr);
        const Violation viol = violation(sp, v, c, level);
        res.feasible = feasible_enough(viol, t) && shape_penalty(sp, v, cfg) <= 1e-8 * t;
        if (res.feasible || mu >= cfg.penalty_max || budget <= 0) break;
        mu = std::min(mu * cfg.penalty_growth, cfg.penalty_max);
    }
    res.v = std::move(v);
    return res;
}

// Candidate mode positions: local maxima of s, and local extrema of b
// (maxima where b > 0, minima where b < 0), largest first.
std::vector<Mode> mode_candidates(const IntervalFamily& f, bool for_b, std::size_t limit) {
    std::vector<double> xs(kShapeGridPoints), ys(kShapeGridPoints);
    for (int i = 0; i < kShapeGridPoints; ++i) {
        xs[i] = f.d() * i / (kShapeGridPoints - 1);
        ys[i] = for_b ? f.eval_b(xs[i]) : f.eval_s(xs[i]);
    }
    std::vector<std::pair<double, Mode>> found;
    for (int i = 0; i < kShapeGridPoints; ++i) {
        const double left = i > 0 ? ys[i - 1] : -std::numeric_limits<double>::infinity();
        const double right = i + 1 < kShapeGridPoints ? ys[i + 1] : -std::numeric_limits<double>::infinity();
        if (!for_b) {
            if (ys[i] >= left && ys[i] > right) found.push_back({ys[i], Mode{xs[i], 1.0}});
            continue;
        }
        if (i == 0 || i + 1 == kShapeGridPoints) continue;
        if (ys[i] > 0.0 && ys[i] >= left && ys[i] > right) found.push_back({ys[i], Mode{xs[i], 1.0}});
        if (ys[i] < 0.0 && ys[i] <= ys[i - 1] && ys[i] < ys[i + 1]) found.push_back({-ys[i], Mode{xs[i], -1.0}});
    }
    std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<Mode> out;
    for (const auto& c : found) {
        if (out.size() >= limit) break;
        out.push_back(c.second);
    }
    if (out.empty()) out.push_back(Mode{for_b ? f.d() / 2.0 : 0.0, 1.0});
    return out;
}

struct StartOutcome {
    IntervalFamily family;
    double objective = 0.0;
    int iterations = 0;
    bool feasible = false;
    bool converged = false;
};

StartOutcome run_start(const OptimizationConfig& cfg, bool freeze_b, const VectorXd* start) {
    SearchProblem sp(cfg, freeze_b);
    VectorXd v0 = start != nullptr ? *start : sp.reverted();
    int budget = cfg.max_iterations;
    auto run = [&](SearchProblem& p, const VectorXd& v) {
        switch (cfg.method) {
            case Method::SequentialQp: return run_sqp(p, cfg, v, budget);
            case Method::SequentialLp: return run_slp(p, cfg, v, budget);
            default: return run_nelder_mead(p, cfg, v, budget);
        }
    };
    RunResult r = run(sp, v0);
    StartOutcome out;
    out.family = sp.family(r.v);
    out.objective = sp.objective(r.v);
    out.iterations = r.iterations;
    out.feasible = r.feasible;
    out.converged = r.converged;

    if (cfg.enforce_unimodal && cfg.method != Method::NelderMead) {
        const auto rep = shape_report(out.family);
        if (!rep.s_unimodal || (cfg.unimodal_b && !rep.b_unimodal_on_0d)) {
            // Fix the modes at each candidate pair and keep the best outcome.
            const auto s_modes = mode_candidates(out.family, false, 3);
            const auto b_modes = freeze_b || !cfg.unimodal_b ? std::vector<Mode>{Mode{}}
                                                             : mode_candidates(out.family, true, 2);
            std::optional<StartOutcome> best;
            const int stage1_iterations = out.iterations;
            int total = 0;
            for (const auto& sm : s_modes) {
                for (const auto& bm : b_modes) {
                    SearchProblem sp2(cfg, freeze_b);
                    sp2.add_shape_rows(sm, bm);
                    budget = cfg.max_iterations;
                    RunResult r2 = run(sp2, r.v);
                    StartOutcome cand;
                    cand.family = sp2.family(r2.v);
                    cand.objective = sp2.objective(r2.v);
                    cand.feasible = r2.feasible;
                    cand.converged = r2.converged;
                    total += r2.iterations;
                    const bool better = !best || (cand.feasible && !best->feasible) ||
                                        (cand.feasible == best->feasible && cand.objective < best->objective);
                    if (better) best = std::move(cand);
                }
            }
            out = std::move(*best);
            out.iterations = stage1_iterations + total;
        }
    }
    return out;
}

std::vector<VectorXd> starting_points(const OptimizationConfig& cfg, bool freeze_b) {
    SearchProblem sp(cfg, freeze_b);
    std::vector<VectorXd> starts{sp.reverted()};
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const int nb = freeze_b ? 0 : static_cast<int>(cfg.knots_b.size()) - 2;
    for (int k = 1; k < cfg.multistart_count; ++k) {
        VectorXd v = sp.reverted();
        for (int i = 0; i < v.size(); ++i) {
            const double scale = i < nb ? 0.1 * sp.t() : 0.2 * sp.t();
            v(i) += scale * unit(rng);
            if (i >= nb) v(i) = std::max(v(i), 0.05 * sp.t());
        }
        starts.push_back(v);
    }
    return starts;
}

OptimizationReport optimize_impl(const OptimizationConfig& cfg, bool freeze_b) {
    cfg.validate();
    const auto starts = starting_points(cfg, freeze_b);
    std::optional<StartOutcome> best;
    int best_index = 0;
    for (std::size_t k = 0; k < starts.size(); ++k) {
        auto out = run_start(cfg, freeze_b, &starts[k]);
        const bool better = !best || (out.feasible && !best->feasible) ||
                            (out.feasible == best->feasible && out.objective < best->objective);
        if (better) {
            best = std::move(out);
            best_index = static_cast<int>(k);
        }
    }
    auto report = certify(best->family, cfg);
    report.iterations = best->iterations;
    report.converged = best->converged;
    report.best_start = best_index;
    return report;
}

}  // namespace

void OptimizationConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0, 1)");
    if (m < 1) fail("m must be at least 1");
    if (!(d > 0.0)) fail("d must be positive");
    if (!(std::fabs(rho) < 1.0)) fail("|rho| must be below 1");
    if (xi.has_value() == ell.has_value()) fail("exactly one of xi and ell must be given");
    if (xi && !(*xi >= 0.0)) fail("xi must be non-negative");
    if (ell && !(*ell > 1.0)) fail("ell must exceed 1");
    if (gaussian_v && !xi) fail("gaussian_v requires xi");
    if (gaussian_v && !(*gaussian_v > 0.0)) fail("gaussian_v must be positive");
    if (!knots_ok(knots_b, d)) fail("knots_b must increase strictly from 0 to d");
    if (!knots_ok(knots_s, d)) fail("knots_s must increase strictly from 0 to d");
    if (knots_b.size() < 3 && rho != 0.0) fail("knots_b needs an interior knot");
    if (!(coverage_tolerance >= 0.0)) fail("coverage_tolerance must be non-negative");
    if (max_iterations < 1) fail("max_iterations must be positive");
    if (multistart_count < 1) fail("multistart_count must be positive");
    if (!(penalty_initial > 0.0) || !(penalty_growth > 1.0) || penalty_max < penalty_initial) {
        fail("invalid penalty schedule");
    }
    if (!(gamma_step > 0.0) || !(gamma_margin > 0.0)) fail("gamma_step and gamma_margin must be positive");
}

std::vector<double> constraint_grid(const OptimizationConfig& cfg, double step) {
    const double near_end = cfg.d + cfg.gamma_margin;
    auto grid = perf::uniform_grid(near_end, step);
    // Coverage can only differ from 1 - alpha while d W exceeds gamma - cut by a
    // non-negligible probability.
    const double cut = cfg.search_quadrature.normal_cut;
    const double w_hi = std::sqrt(special::chi2_quantile(1.0 - kEnvelopeCut, cfg.m) / cfg.m);
    const double far_end = cfg.d * w_hi + cut;
    for (double g = near_end + 4.0 * step; g <= far_end + 1e-9; g += 4.0 * step) grid.push_back(g);
    return grid;
}

OptimizationReport certify(const IntervalFamily& family, const OptimizationConfig& cfg) {
    OptimizationReport r;
    r.family = family;
    const auto& q = cfg.certify_quadrature;
    const perf::Evaluator ev(perf::IntervalShape::from_family(family), cfg.rho, q);
    const auto grid = constraint_grid(cfg, cfg.gamma_step / 4.0);
    const auto mc = perf::min_coverage(ev, grid);
    r.min_coverage_achieved = mc.value;
    r.min_coverage_gamma = mc.gamma;
    const auto ms = perf::max_sel(family, cfg.d + cfg.gamma_margin, q, cfg.gamma_step / 4.0);
    r.max_sel = ms.value;
    r.max_sel_gamma = ms.gamma;
    r.sel0 = ev.sel(0.0);
    if (cfg.ell) {
        r.criterion_value = r.sel0 - 1.0;
    } else if (cfg.gaussian_v) {
        r.criterion_value = perf::criterion_b(family, *cfg.xi, *cfg.gaussian_v, q);
    } else {
        r.criterion_value = perf::criterion_a(family, *cfg.xi, q);
    }
    r.shape = shape_report(family);
    r.feasible = r.min_coverage_achieved >= 1.0 - cfg.alpha - cfg.coverage_tolerance && r.shape.s_positive &&
                 (!cfg.enforce_unimodal || (r.shape.s_unimodal && (!cfg.unimodal_b || r.shape.b_unimodal_on_0d))) &&
                 (!cfg.ell || r.max_sel <= *cfg.ell + cfg.coverage_tolerance);
    r.converged = true;
    return r;
}

OptimizationReport optimize(const OptimizationConfig& config) { return optimize_impl(config, false); }

OptimizationReport optimize_b_zero(const OptimizationConfig& config) {
    if (config.rho != 0.0) throw ConfigError("b = 0 search requires rho = 0");
    return optimize_impl(config, true);
}

std::string to_string(Method method) {
    switch (method) {
        case Method::SequentialQp: return "sequential-qp";
        case Method::SequentialLp: return "sequential-lp";
        default: return "nelder-mead";
    }
}

std::string to_string(BSign sign) {
    switch (sign) {
        case BSign::NonNegative: return "non-negative";
        case BSign::NonPositive: return "non-positive";
        default: return "none";
    }
}

}  // namespace kgci::optim
