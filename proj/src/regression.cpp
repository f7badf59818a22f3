#include "kgci/regression.hpp"

#include "kgci/errors.hpp"
#include "kgci/special_functions.hpp"
#include "kgci/spline_family.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace kgci::regression {

namespace {

// Relative pivot size below which X'X is treated as singular.
constexpr double kRankTol = 1e-10;

Eigen::HouseholderQR<Eigen::MatrixXd> factor(const Eigen::MatrixXd& X) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    const auto R = qr.matrixQR().topRows(X.cols()).triangularView<Eigen::Upper>().toDenseMatrix();
    const Eigen::VectorXd diag = R.diagonal().cwiseAbs();
    const double max_pivot = diag.size() ? diag.maxCoeff() : 0.0;
    if (diag.size() == 0 || !(diag.minCoeff() > kRankTol * max_pivot)) {
        throw SingularDesign("design matrix X has (numerically) dependent columns");
    }
    return qr;
}

// R^{-T} v where X = QR, so that (X'X)^{-1} = R^{-1} R^{-T}.
Eigen::VectorXd whiten(const Eigen::HouseholderQR<Eigen::MatrixXd>& qr, const Eigen::VectorXd& v,
                       Eigen::Index p) {
    return qr.matrixQR()
        .topLeftCorner(p, p)
        .triangularView<Eigen::Upper>()
        .transpose()
        .solve(v);
}

}  // namespace

void validate(const RegressionProblem& problem) {
    const auto n = problem.n();
    const auto p = problem.p();
    if (p < 1) throw SingularDesign("design matrix has no columns");
    if (n <= p) {
        std::ostringstream msg;
        msg << "need n > p (got n=" << n << ", p=" << p << ")";
        throw SingularDesign(msg.str());
    }
    if (problem.a.size() != p || problem.c.size() != p) {
        throw DegenerateContrast("a and c must have length p");
    }
}

DesignConstants design_constants(const RegressionProblem& problem) {
    validate(problem);
    const auto p = problem.p();
    const auto qr = factor(problem.X);
    const Eigen::VectorXd za = whiten(qr, problem.a, p);
    const Eigen::VectorXd zc = whiten(qr, problem.c, p);

    DesignConstants k;
    k.v11 = za.squaredNorm();
    k.v22 = zc.squaredNorm();
    k.v12 = za.dot(zc);
    k.m = static_cast<int>(problem.n() - p);
    if (!(k.v11 > 0.0)) throw DegenerateContrast("v11 = 0: a must be non-zero");
    if (!(k.v22 > 0.0)) throw DegenerateContrast("v22 = 0: c must be non-zero");
    k.rho = k.v12 / std::sqrt(k.v11 * k.v22);
    if (!(std::fabs(k.rho) < 1.0 - 1e-12)) {
        throw DegenerateContrast("|rho| = 1: a and c are linearly dependent");
    }
    return k;
}

FitResult fit(const RegressionProblem& problem, const Eigen::VectorXd& y) {
    validate(problem);
    if (y.size() != problem.n()) throw Error("response length does not match X");
    const auto qr = factor(problem.X);
    FitResult r;
    r.beta_hat = qr.solve(y);
    const Eigen::VectorXd resid = y - problem.X * r.beta_hat;
    const double m = static_cast<double>(problem.n() - problem.p());
    r.sigma_hat = std::sqrt(resid.squaredNorm() / m);
    r.theta_hat = problem.a.dot(r.beta_hat);
    r.tau_hat = problem.c.dot(r.beta_hat) - problem.t;
    return r;
}

ConfidenceInterval standard_interval(const FitResult& fit, const DesignConstants& consts,
                                     double alpha) {
    const double half = special::t_quantile(consts.m, alpha) * std::sqrt(consts.v11) * fit.sigma_hat;
    return {fit.theta_hat - half, fit.theta_hat + half};
}

double tau_statistic(const FitResult& fit, const DesignConstants& consts) {
    const double scale = fit.sigma_hat * std::sqrt(consts.v22);
    if (scale > 0.0) return fit.tau_hat / scale;
    if (fit.tau_hat == 0.0) return 0.0;
    return std::copysign(std::numeric_limits<double>::infinity(), fit.tau_hat);
}

ConfidenceInterval kg_interval(const FitResult& fit, const DesignConstants& consts,
                               const IntervalFamily& family) {
    if (fit.sigma_hat == 0.0) return {fit.theta_hat, fit.theta_hat};
    const double x = tau_statistic(fit, consts);
    const double unit = std::sqrt(consts.v11) * fit.sigma_hat;
    const double center = fit.theta_hat - unit * family.eval_b(x);
    const double half = unit * family.eval_s(std::fabs(x));
    return {center - half, center + half};
}

ConfidenceInterval naive_interval(const FitResult& fit, const DesignConstants& consts,
                                  double alpha, double test_size) {
    if (!(test_size > 0.0 && test_size < 1.0)) throw Error("naive_interval: test_size must lie in (0,1)");
    const double stat = std::fabs(tau_statistic(fit, consts));
    if (stat > special::t_quantile(consts.m, test_size)) return standard_interval(fit, consts, alpha);

    // Refit under c'beta = t: the estimator of theta absorbs the regression on tau_hat.
    const double center = fit.theta_hat - consts.v12 / consts.v22 * fit.tau_hat;
    const double rss = consts.m * fit.sigma_hat * fit.sigma_hat + fit.tau_hat * fit.tau_hat / consts.v22;
    const double sigma_tilde = std::sqrt(rss / (consts.m + 1));
    const double var_unit = consts.v11 - consts.v12 * consts.v12 / consts.v22;
    const double half = special::t_quantile(consts.m + 1, alpha) * std::sqrt(var_unit) * sigma_tilde;
    return {center - half, center + half};
}

OrthogonalContrast orthogonalize_tau(const Eigen::MatrixXd& X, const Eigen::VectorXd& a,
                                     const Eigen::MatrixXd& C, const Eigen::Vector2d& t2) {
    if (C.cols() != 2 || C.rows() != X.cols() || a.size() != X.cols()) {
        throw Error("orthogonalize_tau: C must be p x 2 and a of length p");
    }
    const auto p = X.cols();
    const auto qr = factor(X);
    const Eigen::VectorXd za = whiten(qr, a, p);
    const Eigen::VectorXd z1 = whiten(qr, C.col(0), p);
    const Eigen::VectorXd z2 = whiten(qr, C.col(1), p);
    if (z1.norm() == 0.0 || z2.norm() == 0.0) throw DegenerateContrast("C has a zero column");

    Eigen::MatrixXd span(p, 3);
    span << a, C.col(0), C.col(1);
    Eigen::FullPivHouseholderQR<Eigen::MatrixXd> rank_check(span);
    rank_check.setThreshold(1e-12);
    if (rank_check.rank() < 3) throw DegenerateContrast("a lies in the span of C, or C is rank deficient");

    const double cov1 = za.dot(z1);
    const double cov2 = za.dot(z2);
    const bool zero1 = std::fabs(cov1) <= 1e-12 * za.norm() * z1.norm();
    const bool zero2 = std::fabs(cov2) <= 1e-12 * za.norm() * z2.norm();

    OrthogonalContrast out;
    if (zero1) {
        out.c = C.col(0);
        out.t = t2(0);
        out.ambiguous = zero2;
    } else if (zero2) {
        out.c = C.col(1);
        out.t = t2(1);
    } else {
        const double ratio = cov1 / cov2;
        out.c = C.col(0) - ratio * C.col(1);
        out.t = t2(0) - ratio * t2(1);
    }
    return out;
}

}  // namespace kgci::regression
