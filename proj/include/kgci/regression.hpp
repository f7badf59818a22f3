#pragma once

#include <Eigen/Dense>

namespace kgci {
class IntervalFamily;
}

namespace kgci::regression {

/// Linear model Y = X beta + eps with theta = a'beta and tau = c'beta - t.
struct RegressionProblem {
    Eigen::MatrixXd X;
    Eigen::VectorXd a;
    Eigen::VectorXd c;
    double t = 0.0;

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index p() const { return X.cols(); }
};

/// Variances and covariance of (Theta_hat, tau_hat) in units of sigma^2.
struct DesignConstants {
    double v11 = 0.0;
    double v22 = 0.0;
    double v12 = 0.0;
    double rho = 0.0;
    int m = 0;
};

struct FitResult {
    Eigen::VectorXd beta_hat;
    double sigma_hat = 0.0;
    double theta_hat = 0.0;
    double tau_hat = 0.0;
};

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;

    double width() const { return upper - lower; }
    double center() const { return 0.5 * (lower + upper); }
};

/// Checks shapes and n > p; throws SingularDesign / DegenerateContrast.
void validate(const RegressionProblem& problem);

DesignConstants design_constants(const RegressionProblem& problem);

FitResult fit(const RegressionProblem& problem, const Eigen::VectorXd& y);

ConfidenceInterval standard_interval(const FitResult& fit, const DesignConstants& consts,
                                     double alpha);

ConfidenceInterval kg_interval(const FitResult& fit, const DesignConstants& consts,
                               const IntervalFamily& family);

/// Pre-test interval: the full-model interval when |tau_hat|/(sigma_hat sqrt(v22))
/// exceeds t_{test_size}(m); otherwise the interval from the model refitted
/// under c'beta = t (m+1 residual df).
ConfidenceInterval naive_interval(const FitResult& fit, const DesignConstants& consts,
                                  double alpha, double test_size);

/// Standardized pre-test statistic tau_hat / (sigma_hat sqrt(v22)); 0 when sigma_hat = 0
/// and tau_hat = 0, +/-inf when only sigma_hat = 0.
double tau_statistic(const FitResult& fit, const DesignConstants& consts);

struct OrthogonalContrast {
    Eigen::VectorXd c;
    double t = 0.0;
    /// Both Cov(Theta_hat, Psi_hat_i) vanished; the first column was returned.
    bool ambiguous = false;
};

/// Picks tau = c'beta - t from psi = C'beta - t2 so that Corr(Theta_hat, tau_hat) = 0.
OrthogonalContrast orthogonalize_tau(const Eigen::MatrixXd& X, const Eigen::VectorXd& a,
                                     const Eigen::MatrixXd& C, const Eigen::Vector2d& t2);

}  // namespace kgci::regression
