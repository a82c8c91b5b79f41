#include "nemco/qp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nemco {

namespace {

// Dense lower Cholesky in place; returns false if a pivot drops below eps.
bool cholesky(std::vector<double>& M, int n, double eps) {
  for (int j = 0; j < n; ++j) {
    double diag = M[static_cast<size_t>(j) * n + j];
    for (int k = 0; k < j; ++k) {
      const double ljk = M[static_cast<size_t>(j) * n + k];
      diag -= ljk * ljk;
    }
    if (diag < eps) return false;
    const double ljj = std::sqrt(diag);
    M[static_cast<size_t>(j) * n + j] = ljj;
    for (int i = j + 1; i < n; ++i) {
      double v = M[static_cast<size_t>(i) * n + j];
      const double* ri = &M[static_cast<size_t>(i) * n];
      const double* rj = &M[static_cast<size_t>(j) * n];
      for (int k = 0; k < j; ++k) v -= ri[k] * rj[k];
      M[static_cast<size_t>(i) * n + j] = v / ljj;
    }
  }
  return true;
}

// Solves L L' x = rhs with L the lower factor stored in M.
void cholesky_solve(const std::vector<double>& M, int n, double* rhs) {
  for (int i = 0; i < n; ++i) {
    double v = rhs[i];
    const double* ri = &M[static_cast<size_t>(i) * n];
    for (int k = 0; k < i; ++k) v -= ri[k] * rhs[k];
    rhs[i] = v / ri[i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double v = rhs[i];
    for (int k = i + 1; k < n; ++k) {
      v -= M[static_cast<size_t>(k) * n + i] * rhs[k];
    }
    rhs[i] = v / M[static_cast<size_t>(i) * n + i];
  }
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

QpResult solve_qp(const QpProblem& qp, const QpOptions& options) {
  const int n = qp.n, p = qp.p, m = qp.m;
  QpResult res;
  res.x.assign(static_cast<size_t>(n), 0.0);
  res.y_eq.assign(static_cast<size_t>(p), 0.0);
  res.z_ineq.assign(static_cast<size_t>(m), 1.0);
  res.slack.assign(static_cast<size_t>(m), 1.0);

  std::vector<double>& x = res.x;
  std::vector<double>& y = res.y_eq;
  std::vector<double>& z = res.z_ineq;
  std::vector<double>& s = res.slack;

  // Start slacks off the raw constraint values so badly violated rows do not
  // dominate the first steps.
  for (int i = 0; i < m; ++i) {
    double gx = 0.0;
    const double* gi = &qp.G[static_cast<size_t>(i) * n];
    for (int j = 0; j < n; ++j) gx += gi[j] * x[static_cast<size_t>(j)];
    s[static_cast<size_t>(i)] = std::max(1.0, qp.h[static_cast<size_t>(i)] - gx);
  }

  std::vector<double> r_dual(static_cast<size_t>(n));
  std::vector<double> r_eq(static_cast<size_t>(p));
  std::vector<double> r_ineq(static_cast<size_t>(m));
  std::vector<double> H(static_cast<size_t>(n) * n);
  std::vector<double> rhs1(static_cast<size_t>(n));
  std::vector<double> dx(static_cast<size_t>(n)), dy(static_cast<size_t>(p));
  std::vector<double> dz(static_cast<size_t>(m)), ds(static_cast<size_t>(m));
  std::vector<double> dz_aff(static_cast<size_t>(m)), ds_aff(static_cast<size_t>(m));
  std::vector<double> comp(static_cast<size_t>(m));
  std::vector<double> HinvAt(static_cast<size_t>(n) * std::max(p, 1));
  std::vector<double> schur(static_cast<size_t>(p) * std::max(p, 1));
  std::vector<double> srhs(static_cast<size_t>(p));

  const double b_scale = 1.0 + inf_norm(qp.b);
  const double c_scale = 1.0 + inf_norm(qp.c);
  const double h_scale = 1.0 + inf_norm(qp.h);

  const auto compute_residuals = [&]() {
    for (int j = 0; j < n; ++j) {
      double v = qp.c[static_cast<size_t>(j)];
      const double* qrow = &qp.Q[static_cast<size_t>(j) * n];
      for (int k = 0; k < n; ++k) v += qrow[k] * x[static_cast<size_t>(k)];
      r_dual[static_cast<size_t>(j)] = v;
    }
    for (int i = 0; i < p; ++i) {
      const double* ai = &qp.A[static_cast<size_t>(i) * n];
      for (int j = 0; j < n; ++j) {
        r_dual[static_cast<size_t>(j)] += ai[j] * y[static_cast<size_t>(i)];
      }
    }
    for (int i = 0; i < m; ++i) {
      const double* gi = &qp.G[static_cast<size_t>(i) * n];
      for (int j = 0; j < n; ++j) {
        r_dual[static_cast<size_t>(j)] += gi[j] * z[static_cast<size_t>(i)];
      }
    }
    for (int i = 0; i < p; ++i) {
      double v = -qp.b[static_cast<size_t>(i)];
      const double* ai = &qp.A[static_cast<size_t>(i) * n];
      for (int j = 0; j < n; ++j) v += ai[j] * x[static_cast<size_t>(j)];
      r_eq[static_cast<size_t>(i)] = v;
    }
    for (int i = 0; i < m; ++i) {
      double v = s[static_cast<size_t>(i)] - qp.h[static_cast<size_t>(i)];
      const double* gi = &qp.G[static_cast<size_t>(i) * n];
      for (int j = 0; j < n; ++j) v += gi[j] * x[static_cast<size_t>(j)];
      r_ineq[static_cast<size_t>(i)] = v;
    }
  };

  // Newton solve shared by predictor and corrector: comp holds the target of
  // Z*ds + S*dz = -comp.
  double reg = 1e-11;
  bool factored = false;
  const auto factorize = [&]() {
    std::fill(H.begin(), H.end(), 0.0);
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k <= j; ++k) {
        H[static_cast<size_t>(j) * n + k] = qp.Q[static_cast<size_t>(j) * n + k];
      }
      H[static_cast<size_t>(j) * n + j] += reg;
    }
    for (int i = 0; i < m; ++i) {
      const double w = std::min(
          z[static_cast<size_t>(i)] / std::max(s[static_cast<size_t>(i)], 1e-250),
          1e14);
      const double* gi = &qp.G[static_cast<size_t>(i) * n];
      for (int j = 0; j < n; ++j) {
        if (gi[j] == 0.0) continue;
        const double wgj = w * gi[j];
        double* hrow = &H[static_cast<size_t>(j) * n];
        for (int k = 0; k <= j; ++k) hrow[k] += wgj * gi[k];
      }
    }
    if (!cholesky(H, n, 1e-14)) return false;

    // Schur complement A H^-1 A'.
    for (int i = 0; i < p; ++i) {
      double* col = &HinvAt[static_cast<size_t>(i) * n];
      const double* ai = &qp.A[static_cast<size_t>(i) * n];
      std::copy(ai, ai + n, col);
      cholesky_solve(H, n, col);
    }
    for (int i = 0; i < p; ++i) {
      for (int k = 0; k <= i; ++k) {
        double v = 0.0;
        const double* ai = &qp.A[static_cast<size_t>(i) * n];
        const double* colk = &HinvAt[static_cast<size_t>(k) * n];
        for (int j = 0; j < n; ++j) v += ai[j] * colk[j];
        schur[static_cast<size_t>(i) * p + k] = v;
        schur[static_cast<size_t>(k) * p + i] = v;
      }
      schur[static_cast<size_t>(i) * p + i] += reg;
    }
    return p == 0 || cholesky(schur, p, 1e-14);
  };

  const auto newton_step = [&]() {
    for (int j = 0; j < n; ++j) rhs1[static_cast<size_t>(j)] = -r_dual[static_cast<size_t>(j)];
    for (int i = 0; i < m; ++i) {
      const double si = s[static_cast<size_t>(i)];
      const double coef =
          (z[static_cast<size_t>(i)] * r_ineq[static_cast<size_t>(i)] -
           comp[static_cast<size_t>(i)]) /
          si;
      const double* gi = &qp.G[static_cast<size_t>(i) * n];
      for (int j = 0; j < n; ++j) rhs1[static_cast<size_t>(j)] -= gi[j] * coef;
    }
    std::copy(rhs1.begin(), rhs1.end(), dx.begin());
    cholesky_solve(H, n, dx.data());
    if (p > 0) {
      for (int i = 0; i < p; ++i) {
        double v = r_eq[static_cast<size_t>(i)];
        const double* ai = &qp.A[static_cast<size_t>(i) * n];
        for (int j = 0; j < n; ++j) v += ai[j] * dx[static_cast<size_t>(j)];
        srhs[static_cast<size_t>(i)] = v;
      }
      cholesky_solve(schur, p, srhs.data());
      for (int i = 0; i < p; ++i) dy[static_cast<size_t>(i)] = srhs[static_cast<size_t>(i)];
      for (int j = 0; j < n; ++j) {
        double v = rhs1[static_cast<size_t>(j)];
        for (int i = 0; i < p; ++i) {
          v -= qp.A[static_cast<size_t>(i) * n + j] * dy[static_cast<size_t>(i)];
        }
        dx[static_cast<size_t>(j)] = v;
      }
      cholesky_solve(H, n, dx.data());
    }
    for (int i = 0; i < m; ++i) {
      double gdx = 0.0;
      const double* gi = &qp.G[static_cast<size_t>(i) * n];
      for (int j = 0; j < n; ++j) gdx += gi[j] * dx[static_cast<size_t>(j)];
      ds[static_cast<size_t>(i)] = -r_ineq[static_cast<size_t>(i)] - gdx;
      dz[static_cast<size_t>(i)] =
          -(comp[static_cast<size_t>(i)] +
            z[static_cast<size_t>(i)] * ds[static_cast<size_t>(i)]) /
          s[static_cast<size_t>(i)];
    }
  };

  const auto max_step = [&](const std::vector<double>& vec,
                            const std::vector<double>& dir) {
    double alpha = 1.0;
    for (int i = 0; i < m; ++i) {
      if (dir[static_cast<size_t>(i)] < 0.0) {
        alpha = std::min(alpha, -vec[static_cast<size_t>(i)] /
                                    dir[static_cast<size_t>(i)]);
      }
    }
    return alpha;
  };

  double best_infeasibility = 1e300;
  double best_score = 1e300;
  std::vector<double> bx = x, by = y, bz = z, bs = s;
  int stalled = 0;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    compute_residuals();
    double mu = 0.0;
    for (int i = 0; i < m; ++i) {
      mu += s[static_cast<size_t>(i)] * z[static_cast<size_t>(i)];
    }
    mu /= std::max(m, 1);

    res.iterations = iter;
    res.primal_residual =
        std::max(inf_norm(r_eq) / b_scale, inf_norm(r_ineq) / h_scale);
    res.dual_residual = inf_norm(r_dual) / c_scale;
    res.gap = mu;
    if (mu <= options.tol_gap && res.primal_residual <= options.tol_residual &&
        res.dual_residual <= options.tol_residual) {
      res.converged = true;
      return res;
    }
    const double score =
        std::max({res.primal_residual, res.dual_residual, mu});
    if (score < best_score) {
      best_score = score;
      bx = x;
      by = y;
      bz = z;
      bs = s;
    }
    // Once the products are crushed to round-off the direction carries no
    // information; stop and report the best iterate.
    if (mu <= 1e-16) break;

    // Degenerate instances can crush the complementarity products while a
    // residual stalls; extra regularization and centering get them moving.
    const double infeasibility =
        std::max(res.primal_residual, res.dual_residual);
    if (infeasibility < 0.9 * best_infeasibility) {
      best_infeasibility = infeasibility;
      stalled = 0;
    } else if (infeasibility > options.tol_residual) {
      ++stalled;
    }
    const bool robust = stalled >= 6;

    reg = robust ? 1e-9 : 1e-11;
    factored = factorize();
    for (int attempt = 0; !factored && attempt < 6; ++attempt) {
      reg *= 100.0;
      factored = factorize();
    }
    if (!factored) {
      res.message = "KKT factorization failed";
      return res;
    }

    // Predictor.
    for (int i = 0; i < m; ++i) {
      comp[static_cast<size_t>(i)] =
          s[static_cast<size_t>(i)] * z[static_cast<size_t>(i)];
    }
    newton_step();
    ds_aff = ds;
    dz_aff = dz;
    const double a_aff = std::min(max_step(s, ds_aff), max_step(z, dz_aff));
    double mu_aff = 0.0;
    for (int i = 0; i < m; ++i) {
      mu_aff += (s[static_cast<size_t>(i)] + a_aff * ds_aff[static_cast<size_t>(i)]) *
                (z[static_cast<size_t>(i)] + a_aff * dz_aff[static_cast<size_t>(i)]);
    }
    mu_aff /= std::max(m, 1);
    double sigma = std::pow(std::max(mu_aff, 0.0) / std::max(mu, 1e-300), 3.0);
    sigma = std::clamp(sigma, robust ? 0.5 : 1e-8, 0.99);

    // Corrector.
    for (int i = 0; i < m; ++i) {
      comp[static_cast<size_t>(i)] =
          s[static_cast<size_t>(i)] * z[static_cast<size_t>(i)] +
          ds_aff[static_cast<size_t>(i)] * dz_aff[static_cast<size_t>(i)] -
          sigma * mu;
    }
    newton_step();

    const double a_p = std::min(0.99 * max_step(s, ds), 1.0);
    const double a_d = std::min(0.99 * max_step(z, dz), 1.0);
    for (int j = 0; j < n; ++j) x[static_cast<size_t>(j)] += a_p * dx[static_cast<size_t>(j)];
    for (int i = 0; i < p; ++i) y[static_cast<size_t>(i)] += a_d * dy[static_cast<size_t>(i)];
    for (int i = 0; i < m; ++i) {
      s[static_cast<size_t>(i)] =
          std::max(s[static_cast<size_t>(i)] + a_p * ds[static_cast<size_t>(i)], 1e-300);
      z[static_cast<size_t>(i)] =
          std::max(z[static_cast<size_t>(i)] + a_d * dz[static_cast<size_t>(i)], 1e-300);
    }
  }

  // Iteration limit or crushed products: fall back to the best iterate seen.
  x = bx;
  y = by;
  z = bz;
  s = bs;
  compute_residuals();
  res.primal_residual =
      std::max(inf_norm(r_eq) / b_scale, inf_norm(r_ineq) / h_scale);
  res.dual_residual = inf_norm(r_dual) / c_scale;
  double mu = 0.0;
  for (int i = 0; i < m; ++i) {
    mu += s[static_cast<size_t>(i)] * z[static_cast<size_t>(i)];
  }
  res.gap = mu / std::max(m, 1);
  res.converged = res.gap <= options.tol_gap * 10 &&
                  res.primal_residual <= options.tol_residual * 10 &&
                  res.dual_residual <= options.tol_residual * 10;
  std::ostringstream oss;
  oss << "iteration limit: gap=" << res.gap
      << " primal=" << res.primal_residual << " dual=" << res.dual_residual;
  res.message = oss.str();
  return res;
}

double qp_kkt_residual(const QpProblem& qp, const std::vector<double>& x,
                       const std::vector<double>& y_eq,
                       const std::vector<double>& z_ineq) {
  const int n = qp.n, p = qp.p, m = qp.m;
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    double v = qp.c[static_cast<size_t>(j)];
    for (int k = 0; k < n; ++k) {
      v += qp.Q[static_cast<size_t>(j) * n + k] * x[static_cast<size_t>(k)];
    }
    for (int i = 0; i < p; ++i) {
      v += qp.A[static_cast<size_t>(i) * n + j] * y_eq[static_cast<size_t>(i)];
    }
    for (int i = 0; i < m; ++i) {
      v += qp.G[static_cast<size_t>(i) * n + j] * z_ineq[static_cast<size_t>(i)];
    }
    worst = std::max(worst, std::abs(v));
  }
  for (int i = 0; i < p; ++i) {
    double v = -qp.b[static_cast<size_t>(i)];
    for (int j = 0; j < n; ++j) {
      v += qp.A[static_cast<size_t>(i) * n + j] * x[static_cast<size_t>(j)];
    }
    worst = std::max(worst, std::abs(v));
  }
  for (int i = 0; i < m; ++i) {
    double gx = 0.0;
    for (int j = 0; j < n; ++j) {
      gx += qp.G[static_cast<size_t>(i) * n + j] * x[static_cast<size_t>(j)];
    }
    const double slack = qp.h[static_cast<size_t>(i)] - gx;
    worst = std::max(worst, -slack);                       // primal violation
    worst = std::max(worst, -z_ineq[static_cast<size_t>(i)]);  // sign
    worst = std::max(worst, std::abs(z_ineq[static_cast<size_t>(i)] *
                                     std::max(slack, 0.0)));   // complementarity
  }
  return worst;
}

}  // namespace nemco
