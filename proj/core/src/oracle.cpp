#include "nemco/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "nemco/model.hpp"
#include "nemco/qp.hpp"

namespace nemco {

namespace {

constexpr double kTiny = 1e-12;

// Column layout of the staged QP. Variables fixed at zero by degenerate caps
// are dropped so the interior stays non-empty.
struct StagedQp {
  QpProblem qp;
  int horizon = 0;
  int devices = 0;
  // col[k][slot] = global column or -1 when dropped. Slots: 0 v, 1 e+, 2 e-,
  // 3..3+I-1 d_i, 3+I z+, 4+I z-.
  std::vector<std::vector<int>> col;
};

StagedQp build_staged_qp(const DeterministicProblem& problem) {
  const HouseholdConfig& cfg = problem.config;
  const int T = cfg.horizon();
  const int H = static_cast<int>(problem.realization.size());
  const int I = static_cast<int>(cfg.devices.size());
  if (H < 1 || problem.start_t < 0 || problem.start_t + H != T) {
    throw std::invalid_argument(
        "solve_deterministic: realization must cover start_t .. T-1");
  }
  if (cfg.eta_ev != 1.0) {
    throw std::invalid_argument(
        "solve_deterministic: normalize the EV efficiency first");
  }
  for (double r : problem.realization) {
    if (r < 0.0) throw std::invalid_argument("renewables must be >= 0");
  }

  const bool has_v = cfg.v_max > kTiny && cfg.y0 > kTiny;
  const bool has_ep =
      cfg.e_chg_max > kTiny &&
      !(cfg.e_dis_max <= kTiny && cfg.capacity_B - cfg.s0 <= kTiny);
  const bool has_em = cfg.e_dis_max > kTiny &&
                      !(cfg.e_chg_max <= kTiny && cfg.s0 <= kTiny);

  StagedQp sq;
  sq.horizon = H;
  sq.devices = I;
  sq.col.assign(static_cast<size_t>(H), std::vector<int>(5 + I, -1));

  int n = 0;
  std::vector<double> lo, hi;  // hi < lo means unbounded above
  const auto add_col = [&](int k, int slot, double ub) {
    sq.col[static_cast<size_t>(k)][static_cast<size_t>(slot)] = n++;
    lo.push_back(0.0);
    hi.push_back(ub);
  };
  for (int k = 0; k < H; ++k) {
    if (has_v) add_col(k, 0, cfg.v_max);
    if (has_ep) add_col(k, 1, cfg.e_chg_max);
    if (has_em) add_col(k, 2, cfg.e_dis_max);
    for (int i = 0; i < I; ++i) {
      if (cfg.devices[static_cast<size_t>(i)].d_max > kTiny) {
        add_col(k, 3 + i, cfg.devices[static_cast<size_t>(i)].d_max);
      }
    }
    add_col(k, 3 + I, -1.0);  // z+
    add_col(k, 4 + I, -1.0);  // z-
  }

  QpProblem& qp = sq.qp;
  qp.n = n;
  qp.p = H;
  qp.Q.assign(static_cast<size_t>(n) * n, 0.0);
  qp.c.assign(static_cast<size_t>(n), 0.0);
  qp.A.assign(static_cast<size_t>(H) * n, 0.0);
  qp.b.assign(static_cast<size_t>(H), 0.0);

  for (int k = 0; k < H; ++k) {
    const int t = problem.start_t + k;
    const double pip = cfg.tariff.price_plus(t);
    const double pim = cfg.tariff.price_minus(t);
    const auto& cols = sq.col[static_cast<size_t>(k)];
    double* arow = &qp.A[static_cast<size_t>(k) * n];

    if (cols[0] >= 0) {
      qp.c[static_cast<size_t>(cols[0])] = -cfg.alpha;  // relieves y_T penalty
      arow[cols[0]] = -1.0;
    }
    if (cols[1] >= 0) {
      qp.c[static_cast<size_t>(cols[1])] = -cfg.beta * cfg.eta_c;
      arow[cols[1]] = -1.0;
    }
    if (cols[2] >= 0) {
      qp.c[static_cast<size_t>(cols[2])] = cfg.beta / cfg.eta_d;
      arow[cols[2]] = 1.0;
    }
    for (int i = 0; i < I; ++i) {
      const int cd = cols[static_cast<size_t>(3 + i)];
      if (cd >= 0) {
        const DeviceUtility& dev = cfg.devices[static_cast<size_t>(i)];
        qp.c[static_cast<size_t>(cd)] = -dev.a;
        qp.Q[static_cast<size_t>(cd) * n + cd] = dev.b;
        arow[cd] = -1.0;
      }
    }
    arow[cols[static_cast<size_t>(3 + I)]] = 1.0;
    qp.c[static_cast<size_t>(cols[static_cast<size_t>(3 + I)])] = pip;
    arow[cols[static_cast<size_t>(4 + I)]] = -1.0;
    qp.c[static_cast<size_t>(cols[static_cast<size_t>(4 + I)])] = -pim;
    qp.b[static_cast<size_t>(k)] = -problem.realization[static_cast<size_t>(k)];
  }

  // Inequalities: box rows, SoC prefix rows, total-demand row.
  int m_estimate = n;  // lower bounds
  for (int j = 0; j < n; ++j) {
    if (hi[static_cast<size_t>(j)] >= lo[static_cast<size_t>(j)]) ++m_estimate;
  }
  if (has_ep || has_em) m_estimate += 2 * H;
  if (has_v) m_estimate += 1;
  std::vector<double> G;
  G.reserve(static_cast<size_t>(m_estimate) * n);
  std::vector<double> h;
  h.reserve(static_cast<size_t>(m_estimate));
  const auto add_row = [&](double rhs) -> double* {
    G.resize(G.size() + static_cast<size_t>(n), 0.0);
    h.push_back(rhs);
    return &G[G.size() - static_cast<size_t>(n)];
  };
  for (int j = 0; j < n; ++j) {
    add_row(0.0)[j] = -1.0;  // x_j >= 0
    if (hi[static_cast<size_t>(j)] >= lo[static_cast<size_t>(j)]) {
      add_row(hi[static_cast<size_t>(j)])[j] = 1.0;
    }
  }
  if (has_ep || has_em) {
    for (int k = 0; k < H; ++k) {
      double* up = add_row(cfg.capacity_B - cfg.s0);
      double* dn = add_row(cfg.s0);
      for (int j = 0; j <= k; ++j) {
        const auto& cols = sq.col[static_cast<size_t>(j)];
        if (cols[1] >= 0) {
          up[cols[1]] = cfg.eta_c;
          dn[cols[1]] = -cfg.eta_c;
        }
        if (cols[2] >= 0) {
          up[cols[2]] = -1.0 / cfg.eta_d;
          dn[cols[2]] = 1.0 / cfg.eta_d;
        }
      }
    }
  }
  if (has_v) {
    double* row = add_row(cfg.y0);
    for (int k = 0; k < H; ++k) {
      row[sq.col[static_cast<size_t>(k)][0]] = 1.0;
    }
  }
  qp.m = static_cast<int>(h.size());
  qp.G = std::move(G);
  qp.h = std::move(h);
  return sq;
}

std::vector<Action> extract_actions(const StagedQp& sq,
                                    const DeterministicProblem& problem,
                                    const std::vector<double>& x,
                                    double* max_overlap) {
  const HouseholdConfig& cfg = problem.config;
  const int I = sq.devices;
  std::vector<Action> actions(static_cast<size_t>(sq.horizon));
  double overlap = 0.0;
  for (int k = 0; k < sq.horizon; ++k) {
    const auto& cols = sq.col[static_cast<size_t>(k)];
    Action& a = actions[static_cast<size_t>(k)];
    const auto val = [&](int slot) {
      const int c = cols[static_cast<size_t>(slot)];
      return c >= 0 ? x[static_cast<size_t>(c)] : 0.0;
    };
    const double ep = std::clamp(val(1), 0.0, cfg.e_chg_max);
    const double em = std::clamp(val(2), 0.0, cfg.e_dis_max);
    overlap = std::max(overlap, std::min(ep, em));
    a.v = std::clamp(val(0), 0.0, cfg.v_max);
    a.e = ep - em;
    a.d.resize(static_cast<size_t>(I));
    for (int i = 0; i < I; ++i) {
      a.d[static_cast<size_t>(i)] = std::clamp(
          val(3 + i), 0.0, cfg.devices[static_cast<size_t>(i)].d_max);
    }
  }
  if (max_overlap) *max_overlap = overlap;
  return actions;
}

}  // namespace

double trajectory_objective(const DeterministicProblem& problem,
                            const std::vector<Action>& actions) {
  const HouseholdConfig& cfg = problem.config;
  if (static_cast<int>(actions.size()) !=
      static_cast<int>(problem.realization.size())) {
    throw std::invalid_argument("trajectory_objective: length mismatch");
  }
  State state;
  state.t = problem.start_t;
  state.s = cfg.s0;
  state.y = cfg.y0;
  double total = 0.0;
  for (size_t k = 0; k < actions.size(); ++k) {
    state.r = problem.realization[k];
    state.price_plus = cfg.tariff.price_plus(state.t);
    state.price_minus = cfg.tariff.price_minus(state.t);

    // Project solver round-off back onto the feasible set; anything beyond
    // 1e-6 is a real infeasibility.
    Action a = actions[k];
    const auto [e_dis, e_chg] = effective_storage_bounds(state.s, cfg);
    const double v_feas = std::clamp(a.v, 0.0, std::min(state.y, cfg.v_max));
    const double e_feas = std::clamp(a.e, -e_dis, e_chg);
    if (std::abs(v_feas - a.v) > 1e-6 || std::abs(e_feas - a.e) > 1e-6) {
      std::ostringstream oss;
      oss << "infeasible action at t=" << state.t << ": v=" << a.v
          << " e=" << a.e;
      throw std::domain_error(oss.str());
    }
    a.v = v_feas;
    a.e = e_feas;

    total += stage_reward(cfg, state, a);
    state = step_dynamics(cfg, state, a, 0.0);
  }
  total += terminal_reward(state.s, state.y, cfg.alpha, cfg.beta);
  return total;
}

TrajectorySolution solve_deterministic(const DeterministicProblem& problem,
                                       const SolveOptions& options) {
  StagedQp sq = build_staged_qp(problem);
  QpOptions qp_options;
  qp_options.max_iterations = options.max_iterations;
  QpResult qr = solve_qp(sq.qp, qp_options);
  if (!qr.converged) {
    std::ostringstream oss;
    oss << "solve_deterministic did not converge: " << qr.message
        << " (gap=" << qr.gap << " primal=" << qr.primal_residual
        << " dual=" << qr.dual_residual << ")";
    throw std::runtime_error(oss.str());
  }

  TrajectorySolution sol;
  double overlap = 0.0;
  sol.actions = extract_actions(sq, problem, qr.x, &overlap);
  if (overlap > 1e-6) {
    std::ostringstream oss;
    oss << "simultaneous charge/discharge " << overlap
        << " survived at the optimum";
    throw std::runtime_error(oss.str());
  }
  sol.iterations = qr.iterations;
  sol.objective = trajectory_objective(problem, sol.actions);
  sol.kkt_residual = qp_kkt_residual(sq.qp, qr.x, qr.y_eq, qr.z_ineq);
  if (sol.kkt_residual > options.kkt_tolerance) {
    std::ostringstream oss;
    oss << "stationarity certificate " << sol.kkt_residual
        << " exceeds tolerance " << options.kkt_tolerance;
    throw std::runtime_error(oss.str());
  }
  sol.nu = qr.y_eq;
  return sol;
}

double kkt_residual(const DeterministicProblem& problem,
                    const TrajectorySolution& solution) {
  StagedQp sq = build_staged_qp(problem);
  const QpProblem& qp = sq.qp;
  const int n = qp.n;

  // Lift actions back onto the split variables.
  std::vector<double> x(static_cast<size_t>(n), 0.0);
  for (int k = 0; k < sq.horizon; ++k) {
    const Action& a = solution.actions.at(static_cast<size_t>(k));
    const auto& cols = sq.col[static_cast<size_t>(k)];
    const auto set = [&](int slot, double v) {
      if (cols[static_cast<size_t>(slot)] >= 0) {
        x[static_cast<size_t>(cols[static_cast<size_t>(slot)])] = v;
      }
    };
    set(0, a.v);
    set(1, std::max(a.e, 0.0));
    set(2, std::max(-a.e, 0.0));
    for (int i = 0; i < sq.devices; ++i) {
      set(3 + i, a.d.at(static_cast<size_t>(i)));
    }
    const double z = net_consumption(a, problem.realization[static_cast<size_t>(k)]);
    set(3 + sq.devices, std::max(z, 0.0));
    set(4 + sq.devices, std::max(-z, 0.0));
  }

  // Recover least-squares multipliers on the active set, then clamp the
  // inequality ones to be non-negative.
  std::vector<int> active;
  for (int i = 0; i < qp.m; ++i) {
    double gx = 0.0;
    for (int j = 0; j < n; ++j) {
      gx += qp.G[static_cast<size_t>(i) * n + j] * x[static_cast<size_t>(j)];
    }
    if (qp.h[static_cast<size_t>(i)] - gx <= 1e-6) active.push_back(i);
  }
  const int rows = qp.p + static_cast<int>(active.size());
  std::vector<double> M(static_cast<size_t>(rows) * n, 0.0);
  for (int i = 0; i < qp.p; ++i) {
    std::copy(&qp.A[static_cast<size_t>(i) * n],
              &qp.A[static_cast<size_t>(i) * n] + n,
              &M[static_cast<size_t>(i) * n]);
  }
  for (size_t a = 0; a < active.size(); ++a) {
    std::copy(&qp.G[static_cast<size_t>(active[a]) * n],
              &qp.G[static_cast<size_t>(active[a]) * n] + n,
              &M[(static_cast<size_t>(qp.p) + a) * n]);
  }
  std::vector<double> grad(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    double v = qp.c[static_cast<size_t>(j)];
    for (int k = 0; k < n; ++k) {
      v += qp.Q[static_cast<size_t>(j) * n + k] * x[static_cast<size_t>(k)];
    }
    grad[static_cast<size_t>(j)] = v;
  }
  // Normal equations (M M' + eps) mult = -M grad.
  std::vector<double> mm(static_cast<size_t>(rows) * rows, 0.0);
  std::vector<double> rhs(static_cast<size_t>(rows), 0.0);
  for (int i = 0; i < rows; ++i) {
    for (int k = 0; k <= i; ++k) {
      double v = 0.0;
      for (int j = 0; j < n; ++j) {
        v += M[static_cast<size_t>(i) * n + j] * M[static_cast<size_t>(k) * n + j];
      }
      mm[static_cast<size_t>(i) * rows + k] = v;
      mm[static_cast<size_t>(k) * rows + i] = v;
    }
    mm[static_cast<size_t>(i) * rows + i] += 1e-10;
    double v = 0.0;
    for (int j = 0; j < n; ++j) {
      v += M[static_cast<size_t>(i) * n + j] * grad[static_cast<size_t>(j)];
    }
    rhs[static_cast<size_t>(i)] = -v;
  }
  // Gaussian elimination with partial pivoting.
  for (int col = 0; col < rows; ++col) {
    int piv = col;
    for (int i = col + 1; i < rows; ++i) {
      if (std::abs(mm[static_cast<size_t>(i) * rows + col]) >
          std::abs(mm[static_cast<size_t>(piv) * rows + col])) {
        piv = i;
      }
    }
    if (piv != col) {
      for (int j = 0; j < rows; ++j) {
        std::swap(mm[static_cast<size_t>(col) * rows + j],
                  mm[static_cast<size_t>(piv) * rows + j]);
      }
      std::swap(rhs[static_cast<size_t>(col)], rhs[static_cast<size_t>(piv)]);
    }
    const double d = mm[static_cast<size_t>(col) * rows + col];
    for (int i = col + 1; i < rows; ++i) {
      const double f = mm[static_cast<size_t>(i) * rows + col] / d;
      if (f == 0.0) continue;
      for (int j = col; j < rows; ++j) {
        mm[static_cast<size_t>(i) * rows + j] -=
            f * mm[static_cast<size_t>(col) * rows + j];
      }
      rhs[static_cast<size_t>(i)] -= f * rhs[static_cast<size_t>(col)];
    }
  }
  std::vector<double> mult(static_cast<size_t>(rows), 0.0);
  for (int i = rows - 1; i >= 0; --i) {
    double v = rhs[static_cast<size_t>(i)];
    for (int j = i + 1; j < rows; ++j) {
      v -= mm[static_cast<size_t>(i) * rows + j] * mult[static_cast<size_t>(j)];
    }
    mult[static_cast<size_t>(i)] = v / mm[static_cast<size_t>(i) * rows + i];
  }

  std::vector<double> y_eq(mult.begin(), mult.begin() + qp.p);
  std::vector<double> z_ineq(static_cast<size_t>(qp.m), 0.0);
  for (size_t a = 0; a < active.size(); ++a) {
    z_ineq[static_cast<size_t>(active[a])] =
        std::max(mult[static_cast<size_t>(qp.p) + a], 0.0);
  }
  return qp_kkt_residual(qp, x, y_eq, z_ineq);
}

double BruteForceResult::value_at(int t, double s, double y) const {
  const auto& v = value.at(static_cast<size_t>(t));
  const auto locate = [](const std::vector<double>& grid, double q) {
    const auto it = std::upper_bound(grid.begin(), grid.end(), q);
    size_t i = it == grid.begin() ? 1 : static_cast<size_t>(it - grid.begin());
    i = std::min(std::max<size_t>(i, 1), grid.size() - 1);
    const double w =
        grid.size() == 1
            ? 0.0
            : std::clamp((q - grid[i - 1]) / (grid[i] - grid[i - 1]), 0.0, 1.0);
    return std::pair<size_t, double>(i - 1, w);
  };
  if (s_grid.size() == 1 && y_grid.size() == 1) return v.at(0);
  const auto [si, sw] = locate(s_grid, s);
  const auto [yi, yw] = locate(y_grid, y);
  const size_t ny = y_grid.size();
  if (s_grid.size() == 1) {
    return (1 - yw) * v.at(yi) + yw * v.at(yi + 1);
  }
  if (y_grid.size() == 1) {
    return (1 - sw) * v.at(si) + sw * v.at(si + 1);
  }
  const double v00 = v.at(si * ny + yi);
  const double v01 = v.at(si * ny + yi + 1);
  const double v10 = v.at((si + 1) * ny + yi);
  const double v11 = v.at((si + 1) * ny + yi + 1);
  return (1 - sw) * ((1 - yw) * v00 + yw * v01) +
         sw * ((1 - yw) * v10 + yw * v11);
}

namespace {

long lattice_count(double cap, double res) {
  return std::lround(std::floor(cap / res + 1e-9));
}

void require_lattice(double cap, double res, const char* what) {
  const double snapped = std::round(cap / res) * res;
  if (std::abs(snapped - cap) > 1e-9) {
    std::ostringstream oss;
    oss << "brute_force_dp: " << what << "=" << cap
        << " must be a multiple of the resolution " << res;
    throw std::invalid_argument(oss.str());
  }
}

// Best consumption response per net position: for q on the action lattice,
// bestd[q] = max_d U(d) - P(q*res + d - r).
struct ConsumptionTable {
  std::vector<double> best;
  std::vector<double> argmax;
  long q_min = 0;

  double at(long q) const { return best[static_cast<size_t>(q - q_min)]; }
  double arg(long q) const { return argmax[static_cast<size_t>(q - q_min)]; }
};

ConsumptionTable build_consumption_table(const HouseholdConfig& cfg, long q_min,
                                         long q_max, double res, double dres,
                                         double r, double pip, double pim) {
  const DeviceUtility& dev = cfg.devices.front();
  std::vector<double> d_candidates;
  for (double d = 0.0; d < dev.d_max - 1e-12; d += dres) {
    d_candidates.push_back(d);
  }
  d_candidates.push_back(dev.d_max);

  ConsumptionTable table;
  table.q_min = q_min;
  table.best.resize(static_cast<size_t>(q_max - q_min + 1));
  table.argmax.resize(table.best.size());
  for (long q = q_min; q <= q_max; ++q) {
    const double base = q * res - r;
    double best = -std::numeric_limits<double>::infinity();
    double arg = 0.0;
    for (double d : d_candidates) {
      const double z = base + d;
      const double val =
          dev.utility(d) - nem_payment(z, pip, pim, cfg.tariff.pi_zero);
      if (val > best) {
        best = val;
        arg = d;
      }
    }
    table.best[static_cast<size_t>(q - q_min)] = best;
    table.argmax[static_cast<size_t>(q - q_min)] = arg;
  }
  return table;
}

}  // namespace

BruteForceResult brute_force_dp(
    const HouseholdConfig& config,
    const std::vector<std::vector<QuadNode>>& renewable_nodes,
    const BruteForceOptions& options) {
  const int T = config.horizon();
  if (T > 4) {
    throw std::invalid_argument("brute_force_dp: T must be <= 4");
  }
  if (static_cast<int>(renewable_nodes.size()) != T) {
    throw std::invalid_argument("brute_force_dp: need nodes for every t");
  }
  if (config.devices.size() != 1) {
    throw std::invalid_argument("brute_force_dp: exactly one device supported");
  }
  if (config.eta_ev != 1.0) {
    throw std::invalid_argument("brute_force_dp: normalize EV efficiency first");
  }
  const double res = options.resolution;
  const double dres = options.consumption_resolution > 0.0
                          ? options.consumption_resolution
                          : res / 10.0;
  require_lattice(config.v_max, res, "v_max");
  require_lattice(config.e_chg_max, res, "e_chg_max");
  require_lattice(config.e_dis_max, res, "e_dis_max");
  require_lattice(config.y0, res, "y0");

  BruteForceResult out;

  // y grid: exact lattice 0..y0.
  const long ny = lattice_count(config.y0, res) + 1;
  out.y_grid.resize(static_cast<size_t>(ny));
  for (long i = 0; i < ny; ++i) out.y_grid[static_cast<size_t>(i)] = i * res;
  out.y_grid.back() = config.y0;

  // s grid: reachable band around s0, anchored at s0 and padded so nearby
  // probe states stay clear of the interpolation clamp at the band edge.
  const double margin = std::max(0.25, 2 * res);
  const double reach_dn = T * config.e_dis_max / config.eta_d + margin;
  const double reach_up = T * config.eta_c * config.e_chg_max + margin;
  long n_dn = std::lround(std::ceil(reach_dn / res - 1e-9));
  long n_up = std::lround(std::ceil(reach_up / res - 1e-9));
  n_dn = std::min(n_dn, lattice_count(config.s0, res));
  n_up = std::min(n_up, lattice_count(config.capacity_B - config.s0, res));
  const long ns = n_dn + n_up + 1;
  out.s_grid.resize(static_cast<size_t>(ns));
  for (long i = 0; i < ns; ++i) {
    out.s_grid[static_cast<size_t>(i)] = config.s0 + (i - n_dn) * res;
  }

  const long nv_max = lattice_count(std::min(config.v_max, config.y0), res);
  const long nem = lattice_count(config.e_dis_max, res);
  const long nep = lattice_count(config.e_chg_max, res);
  double node_count = 0;
  for (const auto& nodes : renewable_nodes) node_count += nodes.size();
  const double work = static_cast<double>(ns) * ny * (nv_max + 1) *
                      (nem + nep + 1) * std::max(node_count, 1.0);
  if (work > static_cast<double>(options.cell_budget)) {
    std::ostringstream oss;
    oss << "brute_force_dp: instance needs ~" << work
        << " action evaluations, over the budget " << options.cell_budget;
    throw std::invalid_argument(oss.str());
  }

  out.value.assign(static_cast<size_t>(T) + 1,
                   std::vector<double>(static_cast<size_t>(ns * ny), 0.0));
  for (long si = 0; si < ns; ++si) {
    for (long yi = 0; yi < ny; ++yi) {
      out.value[static_cast<size_t>(T)][static_cast<size_t>(si * ny + yi)] =
          terminal_reward(out.s_grid[static_cast<size_t>(si)],
                          out.y_grid[static_cast<size_t>(yi)], config.alpha,
                          config.beta);
    }
  }

  const double s_lo = out.s_grid.front();
  const double s_hi = out.s_grid.back();
  for (int t = T - 1; t >= 0; --t) {
    const double pip = config.tariff.price_plus(t);
    const double pim = config.tariff.price_minus(t);
    auto& dest = out.value[static_cast<size_t>(t)];
    const auto& next = out.value[static_cast<size_t>(t) + 1];
    std::fill(dest.begin(), dest.end(), 0.0);

    for (const QuadNode& node : renewable_nodes[static_cast<size_t>(t)]) {
      const ConsumptionTable ctab = build_consumption_table(
          config, -nem, nv_max + nep, res, dres, node.value, pip, pim);

      for (long si = 0; si < ns; ++si) {
        const double s = out.s_grid[static_cast<size_t>(si)];
        // Feasible storage moves and their interpolated continuation rows.
        struct Move {
          long j;        // e = j * res
          size_t i0;
          double frac;
        };
        std::vector<Move> moves;
        moves.reserve(static_cast<size_t>(nem + nep + 1));
        for (long j = -nem; j <= nep; ++j) {
          const double e = j * res;
          const double s_next = e >= 0.0 ? s + config.eta_c * e
                                         : s + e / config.eta_d;
          if (s_next < -1e-9 || s_next > config.capacity_B + 1e-9) continue;
          const double clamped = std::clamp(s_next, s_lo, s_hi);
          double pos = (clamped - s_lo) / res;
          size_t i0 = static_cast<size_t>(std::clamp(
              static_cast<long>(pos), 0L, ns - 2 >= 0 ? ns - 2 : 0L));
          double frac = ns > 1 ? pos - static_cast<double>(i0) : 0.0;
          frac = std::clamp(frac, 0.0, 1.0);
          moves.push_back({j, i0, frac});
        }

        for (long yi = 0; yi < ny; ++yi) {
          const double y = out.y_grid[static_cast<size_t>(yi)];
          const long nv = std::min(nv_max, lattice_count(y, res));
          double best = -std::numeric_limits<double>::infinity();
          for (long vi = 0; vi <= nv; ++vi) {
            const long yn = yi - vi;
            for (const Move& mv : moves) {
              double cont;
              if (ns > 1) {
                cont = (1.0 - mv.frac) *
                           next[(mv.i0) * static_cast<size_t>(ny) +
                                static_cast<size_t>(yn)] +
                       mv.frac * next[(mv.i0 + 1) * static_cast<size_t>(ny) +
                                      static_cast<size_t>(yn)];
              } else {
                cont = next[static_cast<size_t>(yn)];
              }
              const double val = ctab.at(vi + mv.j) + cont;
              if (val > best) best = val;
            }
          }
          dest[static_cast<size_t>(si * ny + yi)] += node.weight * best;
        }
      }
    }
  }
  return out;
}

Action brute_force_greedy_action(const HouseholdConfig& config,
                                 const BruteForceResult& table, int t,
                                 double s, double y, double r,
                                 const BruteForceOptions& options) {
  const double res = options.resolution;
  const double dres = options.consumption_resolution > 0.0
                          ? options.consumption_resolution
                          : res / 10.0;
  const double pip = config.tariff.price_plus(t);
  const double pim = config.tariff.price_minus(t);
  const long nv = lattice_count(std::min({config.v_max, y}), res);
  const long nem = lattice_count(config.e_dis_max, res);
  const long nep = lattice_count(config.e_chg_max, res);
  const ConsumptionTable ctab = build_consumption_table(
      config, -nem, nv + nep, res, dres, r, pip, pim);

  double best = -std::numeric_limits<double>::infinity();
  Action arg;
  arg.d.resize(1);
  for (long vi = 0; vi <= nv; ++vi) {
    const double v = vi * res;
    for (long j = -nem; j <= nep; ++j) {
      const double e = j * res;
      const double s_next =
          e >= 0.0 ? s + config.eta_c * e : s + e / config.eta_d;
      if (s_next < -1e-9 || s_next > config.capacity_B + 1e-9) continue;
      const double val =
          ctab.at(vi + j) + table.value_at(t + 1, s_next, y - v);
      if (val > best) {
        best = val;
        arg.v = v;
        arg.e = e;
        arg.d[0] = ctab.arg(vi + j);
      }
    }
  }
  return arg;
}

}  // namespace nemco
