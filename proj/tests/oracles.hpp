// Independent reference computations used by the tests: deliberately built on
// different algorithms than the library (shooting instead of Galerkin, direct
// maximization instead of first-order conditions, brute-force scans instead of
// golden-section) so agreement is meaningful.
#pragma once

#include <functional>
#include <vector>

namespace oracle {

// Two-point boundary value problem -u'' = f(u) on (0,1), u(0) = u(1) = 0,
// by RK4 shooting with secant iteration on the initial slope.  The state fed
// to f is clamped at zero so wild trial slopes cannot blow up the right-hand
// side.  Returns u sampled at the requested abscissae (linear interpolation
// on the integration grid).
std::vector<double> shoot_dirichlet(const std::function<double(double)>& f,
                                    const std::vector<double>& xs,
                                    double step = 1e-4);

// Quasilinear two-point problem -(phi(|w'|) w')' = q(x) on (0,1) with zero
// boundary values, solved by flux integration: the flux F(x) = F0 - Q(x) is
// explicit, w' = A^{-1}(F) pointwise, and F0 is fixed by w(1) = 0.
std::vector<double> flux_solve_1d(const std::function<double(double)>& phi,
                                  const std::function<double(double)>& q,
                                  const std::vector<double>& xs,
                                  int fine = 20000);

// Legendre conjugate max_{s >= 0} (t s - Phi(s)) by bracketing + golden
// section on the objective itself.
double legendre_conjugate(const std::function<double(double)>& Phi, double t);

// Minimum of 1/(t^beta + 1) + t^sigma over [0, 1e6] by a 1e6-point scan.
double brute_min_g(double beta, double sigma);

// Series solution of -laplace(u) = 1 on the unit square with zero boundary
// values, truncated at the given odd-index cutoff.
double poisson_square_series(double x, double y, int odd_cutoff = 119);

}  // namespace oracle
