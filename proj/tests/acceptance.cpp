// Acceptance gate: one line per criterion, nonzero exit if any fails.
// Closed-form oracles and property bounds only; no reference artifacts.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pvs/characteristics.hpp"
#include "pvs/config.hpp"
#include "pvs/errors.hpp"
#include "pvs/io.hpp"
#include "pvs/local_solver.hpp"
#include "pvs/pde_solver.hpp"
#include "pvs/perron_verify.hpp"
#include "pvs/rough_path.hpp"

using namespace pvs;
namespace fs = std::filesystem;

namespace {

int g_failed = 0;

void report(int idx, const char* name, bool pass, const std::string& detail) {
  std::printf("%s %2d %-28s %s\n", pass ? "[PASS]" : "[FAIL]", idx, name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failed;
}

std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double now_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

VecN v1(double a) {
  VecN v(1);
  v[0] = a;
  return v;
}

GeometricRoughPath ramp1(double slope, double T, int segs) {
  std::vector<double> ts;
  std::vector<VecN> ws;
  for (int k = 0; k <= segs; ++k) {
    double t = T * k / segs;
    ts.push_back(t);
    ws.push_back(v1(slope * t));
  }
  return piecewise_linear_lift(ts, ws);
}

GridSpec grid1(double lo, double hi, int nodes) {
  std::array<int, kMaxDim> shape{};
  shape[0] = nodes;
  return GridSpec::make(v1(lo), (hi - lo) / (nodes - 1), shape, 1);
}

HamiltonianSystem kinetic1() { return HamiltonianSystem({kinetic_hamiltonian(1)}); }

// Blank problem; callers overwrite what they need.
PDEProblem problem() {
  return PDEProblem{f_zero(), kinetic1(), ramp1(0.2, 0.5, 64), expr_field(1, "0"),
                    1.0,      grid1(-1.0, 1.0, 65),            1e-3, -1.0};
}

// ------------------------------------------------------------------ 1 ----

void criterion_lifts() {
  auto t0 = std::chrono::steady_clock::now();
  auto bm = brownian_lift(7, 2, 1.0, 4096);
  PathValidationReport built = validate_path(bm);
  double secs = now_seconds(t0);

  std::vector<double> ts = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<VecN> ws;
  for (double t : ts) {
    VecN w(2);
    w[0] = std::sin(3.0 * t);
    w[1] = t * t;
    ws.push_back(w);
  }
  PathValidationReport pl = validate_path(piecewise_linear_lift(ts, ws));

  std::string file = (fs::temp_directory_path() / "pvs_acc_lift.csv").string();
  write_path_csv(bm, file);
  PathValidationReport loaded = validate_path(read_path_csv(file, 0.4));
  fs::remove(file);

  bool pass = built.passed(1e-12) && pl.passed(1e-12) && loaded.passed(1e-10) && secs < 1.0;
  report(1, "rough-path validity", pass,
         "chen " + sci(std::max(built.max_chen_defect, pl.max_chen_defect)) + ", geom " +
             sci(std::max(built.max_geometric_defect, pl.max_geometric_defect)) + ", loaded " +
             sci(std::max(loaded.max_chen_defect, loaded.max_geometric_defect)) + ", " +
             sci(secs) + " s at 4096 samples");
}

// ------------------------------------------------------------------ 2 ----

void criterion_flows() {
  double worst_tc = 0.0, worst_rs = 0.0;
  auto fine = ramp1(0.8, 1.0, 4096);
  {  // H = p^2/2: X = x - p tau, P = p, Z = -p^2 tau / 2
    auto sys = kinetic1();
    double x = 0.4, p = -1.1, tau = 0.8 * 0.75;
    CharState tc = flow(sys, fine, CharState::start(v1(x), v1(p)), 0.0, 0.75,
                        FlowMode::time_change);
    CharState rs = flow(sys, fine, CharState::start(v1(x), v1(p)), 0.0, 0.75,
                        FlowMode::rough_step);
    for (const CharState* s : {&tc, &rs}) {
      double e = std::max({std::fabs(s->x[0] - (x - p * tau)), std::fabs(s->p[0] - p),
                           std::fabs(s->z - (-0.5 * p * p * tau))});
      (s == &tc ? worst_tc : worst_rs) = std::max(s == &tc ? worst_tc : worst_rs, e);
    }
  }
  {  // H = p^2/2 - x: P = p - tau, X = x - p tau + tau^2/2
    HamiltonianSystem sys({separated_hamiltonian(expr_field(1, "x1"))});
    auto path = ramp1(1.0, 1.0, 4096);
    double x = 0.3, p = 0.9, tau = 0.8;
    CharState tc = flow(sys, path, CharState::start(v1(x), v1(p)), 0.0, 0.8,
                        FlowMode::time_change);
    CharState rs = flow(sys, path, CharState::start(v1(x), v1(p)), 0.0, 0.8,
                        FlowMode::rough_step);
    double xe = x - p * tau + 0.5 * tau * tau, pe = p - tau;
    worst_tc = std::max({worst_tc, std::fabs(tc.x[0] - xe), std::fabs(tc.p[0] - pe)});
    worst_rs = std::max({worst_rs, std::fabs(rs.x[0] - xe), std::fabs(rs.p[0] - pe)});
  }

  // Oscillatory driver W(t) = eta sin(t / eta^2).
  const double eta = 0.05;
  const double T = 0.01;
  std::vector<double> ts;
  std::vector<VecN> ws;
  for (int k = 0; k <= 2048; ++k) {
    double t = T * k / 2048;
    ts.push_back(t);
    ws.push_back(v1(eta * std::sin(t / (eta * eta))));
  }
  auto osc = piecewise_linear_lift(ts, ws);
  FlowOptions fine_step;
  fine_step.step = 1e-4;
  double worst_eq = 0.0;
  {
    auto sys = kinetic1();
    worst_eq = mode_equivalence_defect(sys, osc, CharState::start(v1(0.2), v1(0.7)), 0.0, T,
                                       fine_step);
  }
  {
    HamiltonianSystem sys({separated_hamiltonian(expr_field(1, "x1"))});
    worst_eq = std::max(worst_eq, mode_equivalence_defect(sys, osc,
                                                          CharState::start(v1(0.2), v1(0.7)), 0.0,
                                                          T, fine_step));
  }

  bool pass = worst_tc <= 1e-8 && worst_rs <= 1e-5 && worst_eq <= 1e-6;
  report(2, "characteristic closed forms", pass,
         "time_change " + sci(worst_tc) + ", rough_step " + sci(worst_rs) + ", equivalence " +
             sci(worst_eq));
}

// ------------------------------------------------------------------ 3 ----

void criterion_operator_properties() {
  auto sys = kinetic1();
  auto path = ramp1(0.5, 0.5, 512);
  MatN A(1, 1);
  A(0, 0) = 0.8;
  auto quad = quadratic_field(1, 0.0, VecN(1), A);
  auto lin = quadratic_field(1, 0.3, v1(0.5), MatN(1, 1));
  std::vector<double> times = {0.125, 0.25, 0.375};

  double worst_shift = 0.0;
  bool bounds_ok = true;
  std::vector<double> semis;
  for (int nodes : {129, 257, 513}) {
    GridSpec g = grid1(-2.0, 2.0, nodes);
    PropertyReport rep = check_properties(sys, path, *quad, *lin, 0.75, 0.0, times, g);
    worst_shift = std::max(worst_shift, rep.shift_defect);
    double cap = 5.0 * g.dx * g.dx;
    if (rep.max_comparison() > cap || rep.max_semigroup() > cap) bounds_ok = false;
    semis.push_back(rep.max_semigroup());
  }
  double ord1 = std::log2(semis[0] / semis[1]);
  double ord2 = std::log2(semis[1] / semis[2]);
  double order = std::min(ord1, ord2);

  bool pass = worst_shift <= 1e-10 && bounds_ok && order >= 1.8;
  report(3, "local operator identities", pass,
         "shift " + sci(worst_shift) + ", semigroup " + sci(semis[0]) + "/" + sci(semis[1]) +
             "/" + sci(semis[2]) + ", order " + sci(order));
}

// ------------------------------------------------------------------ 4 ----

void criterion_horizon() {
  auto sys = kinetic1();
  auto path = ramp1(1.0, 1.0, 256);
  double a = 2.0;
  MatN A(1, 1);
  A(0, 0) = a;
  auto phi = quadratic_field(1, 0.0, VecN(1), A);
  GridSpec g = grid1(-1.0, 1.0, 33);
  LocalOperatorOptions opts;
  HorizonReport rep = local_horizon(sys, path, *phi, 0.5, g, opts);
  double analytic = (1.0 - opts.theta_inv) / a;
  double sample = 1.0 / 256;
  bool pass = rep.crossed_forward && std::fabs(rep.h_forward - analytic) <= sample + 1e-12;
  report(4, "horizon detection", pass,
         "h " + sci(rep.h_forward) + ", analytic " + sci(analytic) + ", gap " +
             sci(std::fabs(rep.h_forward - analytic)));
}

// ------------------------------------------------------------------ 5 ----

void criterion_dependence() {
  auto sys = kinetic1();
  auto path = ramp1(0.5, 1.0, 512);
  auto phi1 = expr_field(1, "0.1*x1^2+0.1*exp(-50.0*x1^2)");
  auto phi2 = expr_field(1, "0.1*x1^2");
  GridSpec g = grid1(-2.0, 2.0, 257);
  AnnulusSpec K{v1(0.0), 0.5, 1.2};
  DependenceReport rep = domain_of_dependence_check(sys, path, *phi1, *phi2, 0.0, 0.2, K, 2.0, g);
  bool pass = !rep.shrunken_empty && rep.defect <= 5.0 * g.dx * g.dx && rep.sup_global > 0.01 &&
              rep.sup_evolved <= 5.0 * g.dx * g.dx;
  report(5, "domain of dependence", pass,
         "defect " + sci(rep.defect) + " (cap " + sci(5.0 * g.dx * g.dx) + "), annulus sup " +
             sci(rep.sup_evolved) + ", global sup " + sci(rep.sup_global));
}

// ------------------------------------------------------------------ 6 ----

void criterion_solver_oracles() {
  auto t0 = std::chrono::steady_clock::now();
  double heat_err = 0.0;
  {
    PDEProblem prob = problem();
    prob.F = f_heat(1.0);
    prob.sys = HamiltonianSystem({x_independent_hamiltonian(1, "0.0*p1")});
    prob.path = ramp1(0.2, 0.5, 256);
    prob.u0 = expr_field(1, "exp(-2.0*x1^2)");
    prob.T = 0.1;
    prob.grid = grid1(-3.0, 3.0, 129);
    prob.dt = 1e-3;
    SolveReport rep = solve_smooth(prob, {0.1});
    const GridField& u = rep.at(0.1);
    double s2 = 0.25 + 2.0 * 0.1;
    for (std::size_t i = 0; i < u.size(); ++i) {
      double x = prob.grid.coord(i)[0];
      double exact = std::sqrt(0.25 / s2) * std::exp(-x * x / (2.0 * s2));
      heat_err = std::max(heat_err, std::fabs(u[i] - exact));
    }
  }
  double heat_secs = now_seconds(t0);

  auto t1 = std::chrono::steady_clock::now();
  double hl_err = 0.0;
  {
    PDEProblem prob = problem();
    prob.F = f_zero();
    prob.sys = kinetic1();
    prob.path = ramp1(1.0, 0.5, 512);
    prob.u0 = expr_field(1, "0.75*(2.0-sqrt(x1^2))");
    prob.T = 0.25;
    prob.grid = grid1(-2.0, 2.0, 257);
    prob.dt = 1e-3;
    prob.p_bound = 1.0;
    SolveReport rep = solve_smooth(prob, {0.25});
    const GridField& u = rep.at(0.25);
    double ct = 0.25;
    for (std::size_t i = 0; i < u.size(); ++i) {
      double x = prob.grid.coord(i)[0];
      double best = -1e300;
      for (int k = 0; k <= 8000; ++k) {
        double y = -4.0 + 8.0 * k / 8000;
        best = std::max(best, 0.75 * (2.0 - std::fabs(y)) - (x - y) * (x - y) / (2.0 * ct));
      }
      hl_err = std::max(hl_err, std::fabs(u[i] - best));
    }
  }
  double hl_secs = now_seconds(t1);

  bool pass = heat_err <= 5e-3 && hl_err <= 0.05 && heat_secs < 60.0 && hl_secs < 60.0;
  report(6, "solver oracles", pass,
         "heat sup " + sci(heat_err) + " (" + sci(heat_secs) + " s), variational sup " +
             sci(hl_err) + " (" + sci(hl_secs) + " s)");
}

// ------------------------------------------------------------------ 7 ----

void criterion_cauchy() {
  PDEProblem prob = problem();
  prob.F = f_zero();
  prob.sys = kinetic1();
  prob.path = brownian_lift(42, 1, 0.25, 1024);
  prob.u0 = expr_field(1, "exp(-2.0*x1^2)");
  prob.T = 0.25;
  prob.grid = grid1(-3.0, 3.0, 129);
  prob.dt = 5e-4;
  prob.p_bound = 4.0;
  RoughSolveReport rep = solve_rough(prob, 4, {0.125, 0.25});
  const std::vector<double>& d = rep.cauchy.d;
  bool pass = d.size() == 3 && d[0] > d[1] && d[1] > d[2] && d[2] <= 0.5 * d[0];
  report(7, "rough-mode contraction", pass,
         "d " + sci(d.size() > 0 ? d[0] : -1.0) + " > " + sci(d.size() > 1 ? d[1] : -1.0) +
             " > " + sci(d.size() > 2 ? d[2] : -1.0));
}

// ------------------------------------------------------------------ 8 ----

struct SolvedConfig {
  RunConfig cfg;
  PDEProblem prob = problem();
  std::vector<double> times;
  SolveReport sol;
  SubSuperPair pair;
};

SolvedConfig run_shipped(const std::string& name) {
  SolvedConfig out;
  out.cfg = load_config(std::string(PVS_CONFIG_DIR) + "/" + name);
  out.prob = build_problem(out.cfg);
  out.times = out.cfg.out_times;
  if (out.times.empty()) out.times = {out.cfg.T};
  if (out.times.front() > 1e-12) out.times.insert(out.times.begin(), 0.0);
  out.sol = solve_smooth(out.prob, out.times);
  out.pair = build_sub_super(out.prob, *out.prob.u0, out.times);
  return out;
}

void criterion_sandwich() {
  double worst = 0.0;
  double tol_used = 0.0;
  bool mono_fwd = true, mono_rev = true;
  for (const char* name : {"kinetic_verify.toml", "brownian_cauchy.toml"}) {
    SolvedConfig sc = run_shipped(name);
    double tol = sc.cfg.tol;
    tol_used = std::max(tol_used, tol);
    for (std::size_t k = 0; k < sc.times.size(); ++k) {
      const GridField& u = sc.sol.frames[k];
      for (std::size_t i = 0; i < u.size(); ++i) {
        worst = std::max(worst, sc.pair.lower[k][i] - u[i]);
        worst = std::max(worst, u[i] - sc.pair.upper[k][i]);
      }
    }
  }

  // Ordered pair from the monotone scheme: add a nonnegative patch to u0,
  // solve both with one pinned gradient cap, and track the excess each way.
  {
    SolvedConfig sc = run_shipped("kinetic_verify.toml");
    PDEProblem lo = sc.prob;
    lo.p_bound = sc.sol.p_bound + 1.0;
    PDEProblem hi = lo;
    hi.u0 = expr_field(1, "(" + sc.cfg.u0_expr + ")+(0.3*exp(-8.0*(x1-0.35)^2))");
    SolveReport ulo = solve_smooth(lo, sc.times);
    SolveReport uhi = solve_smooth(hi, sc.times);
    FieldSeries slo = to_series(ulo), shi = to_series(uhi);
    CompareReport fwd = compare(slo, shi, sc.cfg.tol);
    CompareReport rev = compare(shi, slo, sc.cfg.tol);
    for (double e : fwd.excess)
      if (e > sc.cfg.tol) mono_fwd = false;
    mono_rev = rev.nonincreasing_vs_initial;
  }

  bool pass = worst <= tol_used && mono_fwd && mono_rev;
  report(8, "sandwich and comparison", pass,
         "barrier violation " + sci(worst) + " (tol " + sci(tol_used) + "), ordered pair " +
             (mono_fwd && mono_rev ? "monotone" : "NOT monotone"));
}

// ------------------------------------------------------------------ 9 ----

FieldSeries translate_series(const FieldSeries& s, int cells) {
  FieldSeries out = s;
  const GridSpec& g = s.grid();
  int n = g.shape[0];
  for (std::size_t k = 0; k < s.frames.size(); ++k) {
    for (int i = 0; i < n; ++i) {
      int src = i - cells;
      src = std::max(0, std::min(n - 1, src));
      out.frames[k][static_cast<std::size_t>(i)] = s.frames[k][static_cast<std::size_t>(src)];
    }
  }
  return out;
}

void criterion_perron() {
  SolvedConfig sc = run_shipped("kinetic_verify.toml");
  const GridSpec& g = sc.prob.grid;
  double dx = g.dx;
  FieldSeries base = lower_series(sc.pair);
  FieldSeries usol = to_series(sc.sol);

  // Five spatial translates, each lowered by its initial excess over u0 so
  // every candidate starts (and provably stays) below the solution.
  int cells = g.shape[0] / 16;
  std::vector<FieldSeries> subs;
  for (int k = -2; k <= 2; ++k) {
    FieldSeries t = translate_series(base, k * cells);
    double m = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      m = std::max(m, t.frames[0][i] - base.frames[0][i]);
    for (auto& f : t.frames)
      for (std::size_t i = 0; i < f.size(); ++i) f[i] -= m;
    subs.push_back(std::move(t));
  }
  FieldSeries env = envelope(subs);

  double excess = 0.0;
  for (std::size_t k = 0; k < env.times.size(); ++k)
    for (std::size_t i = 0; i < g.size(); ++i)
      excess = std::max(excess, env.frames[k][i] - usol.frames[k][i]);

  // Aimed probes at the mid time: quadratic majorant of the envelope at the
  // anchor with slope matched to the barrier drift.
  std::size_t mid = env.times.size() / 2;
  double t_mid = env.times[mid];
  double hwin = std::min(0.45 * sc.cfg.T, t_mid - env.times.front() + 1e-9);
  int n = g.dim;
  VecN center = v1(0.5 * (sc.cfg.box_lo + sc.cfg.box_hi));
  auto aimed = [&](int cells_off) {
    TestFunctionProbe pr;
    pr.t0 = t_mid;
    pr.x0 = center;
    pr.x0[0] += cells_off * dx;
    std::array<int, kMaxDim> idx{};
    idx[0] = static_cast<int>(std::lround((pr.x0[0] - g.lo[0]) / dx));
    std::size_t node = g.flat(idx);
    const GridField& frame = env.frames[mid];
    VecN g0 = node_gradient(frame, node);
    MatN A = node_hessian(frame, node) + 0.5 * MatN::identity(n);
    double c0 = frame[node] - dot(g0, pr.x0) + 0.5 * dot(matvec(A, pr.x0), pr.x0);
    pr.phi = quadratic_field(n, c0, g0 + (-1.0) * matvec(A, pr.x0), A);
    pr.a = sc.pair.C_lower;
    pr.b = 0.5;
    pr.r = 3.2 * dx;
    pr.h = hwin;
    return pr;
  };
  int koff = std::max(2, g.shape[0] / 8);
  std::vector<TestFunctionProbe> probes = {aimed(-koff), aimed(0), aimed(koff)};
  SubsolutionReport rep =
      check_subsolution(env, probes, sc.prob.F, sc.prob.sys, sc.prob.path);
  bool any_interior = false;
  for (const auto& p : rep.probes) any_interior = any_interior || p.interior;

  // Bump certificate on the frozen geometry.
  HamiltonianSystem sys = kinetic1();
  GeometricRoughPath path = ramp1(0.1, 1.0, 256);
  bool bump_ok = false;
  std::string bump_note;
  {
    GridSpec bg = grid1(-1.0, 1.0, 129);
    MatN A(1, 1);
    A(0, 0) = 0.8;
    auto phi_w = quadratic_field(1, 0.3, v1(0.2), A);
    FieldSeries w;
    for (int k = 0; k <= 16; ++k) {
      double t = (300 + 25 * k) / 1000.0;
      w.times.push_back(t);
      w.frames.push_back(local_apply(sys, path, *phi_w, 0.5, t, bg).phi);
    }
    TestFunctionProbe pr;
    pr.x0 = v1(0.0);
    pr.t0 = 0.5;
    pr.phi = phi_w;
    pr.a = 0.0;
    pr.b = -0.4;
    pr.r = 0.4;
    pr.h = 0.25;
    BumpSpec spec;  // (gamma, r, s) = (0.1, 0.4, 0.2)
    BumpResult res = bump(sys, path, f_constant(1.0), w, pr, spec, 0.5);
    const BumpCertificate& c = res.cert;
    bool clauses = c.anchor_gain > 0.0 && c.sup_gain >= c.anchor_gain - 1e-12 &&
                   c.collar_time_min >= c.slack_time && c.collar_space_min >= c.slack_space &&
                   c.unchanged_outside;
    bump_ok = !c.refused && c.passed && clauses && std::fabs(c.delta - 0.001) <= 1e-15 &&
              std::fabs(c.slack_time - 2.5e-3) <= 1e-15 && std::fabs(c.slack_space - 1e-3) <= 1e-15;
    bump_note = "delta " + sci(c.delta) + ", slacks " + sci(c.slack_time) + "/" +
                sci(c.slack_space) + (c.passed ? ", certified" : ", NOT certified");
  }

  bool pass = rep.max_violation <= sc.cfg.tol && any_interior && excess <= sc.cfg.tol && bump_ok;
  report(9, "perron structure", pass,
         "envelope violation " + sci(rep.max_violation) + ", excess over solver " + sci(excess) +
             ", " + bump_note);
}

// ----------------------------------------------------------------- 10 ----

int run_cli(const std::string& args) {
  std::string cmd = std::string(PVS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

bool same_bytes(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  return fa && fb && sa == sb;
}

void criterion_determinism() {
  fs::path root = fs::temp_directory_path() / "pvs_acceptance";
  fs::remove_all(root);
  fs::path d1 = root / "run1", d2 = root / "run2";
  std::string cfg = std::string(PVS_CONFIG_DIR) + "/brownian_cauchy.toml";

  int rc1 = run_cli("solve --config " + cfg + " --seed 99 --out " + d1.string());
  int rc2 = run_cli("solve --config " + cfg + " --seed 99 --out " + d2.string());

  bool identical = rc1 == 0 && rc2 == 0;
  int compared = 0;
  if (identical) {
    for (const auto& e : fs::recursive_directory_iterator(d1)) {
      if (!e.is_regular_file()) continue;
      fs::path rel = fs::relative(e.path(), d1);
      if (!fs::exists(d2 / rel) || !same_bytes(e.path(), d2 / rel)) {
        identical = false;
        break;
      }
      ++compared;
    }
    identical = identical && compared > 0;
  }

  int verify_rc = run_cli("verify --config " + std::string(PVS_CONFIG_DIR) +
                          "/kinetic_verify.toml --out " + (root / "verify").string());
  fs::remove_all(root);

  bool pass = identical && verify_rc == 0;
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d artifacts byte-identical, verify exit %d", compared,
                verify_rc);
  report(10, "cli determinism", pass, buf);
}

}  // namespace

int main() {
  std::printf("acceptance gate\n");
  criterion_lifts();
  criterion_flows();
  criterion_operator_properties();
  criterion_horizon();
  criterion_dependence();
  criterion_solver_oracles();
  criterion_cauchy();
  criterion_sandwich();
  criterion_perron();
  criterion_determinism();
  if (g_failed) {
    std::printf("%d criterion(s) failed\n", g_failed);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
