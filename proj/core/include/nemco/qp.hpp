#pragma once

#include <string>
#include <vector>

namespace nemco {

/// Dense convex quadratic program
///
///   minimize    x'Qx/2 + c'x
///   subject to  A x = b
///               G x <= h
///
/// Q must be positive semidefinite; every variable must appear in at least
/// one inequality that bounds it below (true for the staged dispatch problems
/// built here, where all variables carry box rows), which keeps the reduced
/// Newton system positive definite.
struct QpProblem {
  int n = 0;  // variables
  int p = 0;  // equality rows
  int m = 0;  // inequality rows

  std::vector<double> Q;  // n*n, row-major, symmetric
  std::vector<double> c;  // n
  std::vector<double> A;  // p*n, row-major
  std::vector<double> b;  // p
  std::vector<double> G;  // m*n, row-major
  std::vector<double> h;  // m
};

struct QpResult {
  bool converged = false;
  int iterations = 0;
  std::vector<double> x;       // primal
  std::vector<double> y_eq;    // equality multipliers
  std::vector<double> z_ineq;  // inequality multipliers, >= 0
  std::vector<double> slack;   // h - Gx
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;  // complementarity measure slack'z / m
  std::string message;
};

struct QpOptions {
  int max_iterations = 60;
  double tol_gap = 1e-10;
  double tol_residual = 1e-8;
};

/// Mehrotra predictor-corrector primal-dual interior point method. The
/// Newton step solves the reduced system
///   [Q + G'(z/s)G  A'] [dx]   [.]
///   [A             0 ] [dy] = [.]
/// by dense LDL'-free Cholesky on the Schur complement.
QpResult solve_qp(const QpProblem& qp, const QpOptions& options = {});

/// Max KKT violation of (x, y_eq, z_ineq) for the problem: stationarity,
/// primal feasibility, multiplier sign, and complementarity, in infinity
/// norm.
double qp_kkt_residual(const QpProblem& qp, const std::vector<double>& x,
                       const std::vector<double>& y_eq,
                       const std::vector<double>& z_ineq);

}  // namespace nemco
