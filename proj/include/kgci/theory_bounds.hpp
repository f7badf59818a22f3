#pragma once

#include "kgci/performance.hpp"

namespace kgci::bounds {

struct BoundResult {
    int m = 1;
    double alpha = 0.05;
    double d = 0.0;
    double lambda_m = 0.0;
    double nu_m = 0.0;
    /// nu_m (1 - lambda_m) / lambda_m
    double eta_m = 0.0;
    /// 1 - eta_m: no s in the class reaches a smaller e(0; s) when rho = 0.
    double lower_bound = 1.0;
};

/// Solution in (0,1) of sqrt(m) sqrt(K(lambda)^(1/(m/2+1)) - 1) = t(m), with
/// K(lambda) = sqrt(2/pi) (1 - lambda) t(m) E(W) / lambda. Bisection.
double lambda_m(int m, double alpha);

/// Same root by the secant method on log(lambda); used to cross-check bisection.
double lambda_m_secant(int m, double alpha);

/// Left side of the defining equation minus t(m); NaN where the root is undefined.
double lambda_residual(double lambda, int m, double alpha);

/// sqrt(1 + x^2/m) t(m) on [0, d), t(m) beyond.
double s_lambda(double x, int m, double alpha, double d);

BoundResult theorem3_bound(int m, double alpha, double d, const performance::QuadratureSettings& q = {});

}  // namespace kgci::bounds
