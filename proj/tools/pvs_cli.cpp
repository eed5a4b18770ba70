#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pvs/characteristics.hpp"
#include "pvs/config.hpp"
#include "pvs/errors.hpp"
#include "pvs/io.hpp"
#include "pvs/local_solver.hpp"
#include "pvs/pde_solver.hpp"
#include "pvs/perron_verify.hpp"
#include "pvs/rough_path.hpp"

namespace {

using namespace pvs;

struct RunContext {
  RunConfig cfg;
  std::string config_text;
  std::string out_dir;
  std::string subcommand;
  std::vector<std::string> artifacts;
  std::vector<std::string> summary;
  bool all_passed = true;

  void artifact(const std::string& name) { artifacts.push_back(name); }

  void line(const std::string& check, const std::string& value, const std::string& bound,
            bool pass) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-34s %-16s %-14s %s", check.c_str(), value.c_str(),
                  bound.c_str(), pass ? "pass" : "FAIL");
    summary.push_back(buf);
    std::printf("%s\n", buf);
    if (!pass) all_passed = false;
  }

  void note(const std::string& text) {
    summary.push_back(text);
    std::printf("%s\n", text.c_str());
  }

  std::string path(const std::string& name) const { return out_dir + "/" + name; }
};

std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return std::string(buf);
}

void write_manifest(RunContext& ctx) {
  std::sort(ctx.artifacts.begin(), ctx.artifacts.end());
  std::ostringstream j;
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(fnv1a64(ctx.config_text)));
  j << "{\n  \"subcommand\": \"" << ctx.subcommand << "\",\n";
  j << "  \"config_hash\": \"" << hash << "\",\n";
  j << "  \"seed\": " << ctx.cfg.path_seed << ",\n";
  j << "  \"levels\": " << ctx.cfg.levels << ",\n";
  j << "  \"artifacts\": [";
  for (std::size_t i = 0; i < ctx.artifacts.size(); ++i)
    j << (i ? ", " : "") << "\"" << ctx.artifacts[i] << "\"";
  j << "]\n}\n";
  write_text_file(ctx.path("manifest.json"), j.str());
}

std::vector<double> output_times(const RunConfig& c) {
  if (!c.out_times.empty()) return c.out_times;
  return {c.T};
}

// ---------------------------------------------------------------- lift ----

int run_lift(RunContext& ctx) {
  GeometricRoughPath path = build_path(ctx.cfg);
  PathValidationReport rep = validate_path(path);
  double tol = ctx.cfg.path_source == "file" ? 1e-10 : 1e-12;
  write_path_csv(path, ctx.path("path.csv"));
  ctx.artifact("path.csv");
  write_json_report(ctx.path("lift_report.json"), rep);
  ctx.artifact("lift_report.json");
  ctx.line("path chen defect", sci(rep.max_chen_defect), sci(tol), rep.max_chen_defect <= tol);
  ctx.line("path geometric defect", sci(rep.max_geometric_defect), sci(tol),
           rep.max_geometric_defect <= tol);
  return ctx.all_passed ? 0 : 1;
}

// ---------------------------------------------------------------- flow ----

int run_flow(RunContext& ctx) {
  const RunConfig& c = ctx.cfg;
  GeometricRoughPath path = build_path(c);
  HamiltonianSystem sys = build_hamiltonians(c);
  ScalarFieldPtr u0 = build_u0(c);
  FlowMode mode = auto_flow_mode(sys);
  std::vector<double> times = output_times(c);

  std::ostringstream csv;
  csv << "seed";
  for (int d = 0; d < c.dim; ++d) csv << ",x0_" << (d + 1);
  csv << ",t";
  for (int d = 0; d < c.dim; ++d) csv << ",x" << (d + 1);
  for (int d = 0; d < c.dim; ++d) csv << ",p" << (d + 1);
  csv << ",z,det\n";

  // a small lattice of launch points across the box
  const int per_axis = 5;
  std::vector<VecN> seeds;
  std::array<int, kMaxDim> idx{};
  std::size_t total = 1;
  for (int d = 0; d < c.dim; ++d) total *= per_axis;
  for (std::size_t f = 0; f < total; ++f) {
    std::size_t rem = f;
    for (int d = c.dim - 1; d >= 0; --d) {
      idx[d] = static_cast<int>(rem % per_axis);
      rem /= per_axis;
    }
    VecN x(c.dim);
    for (int d = 0; d < c.dim; ++d)
      x[d] = c.box_lo + (c.box_hi - c.box_lo) * idx[d] / (per_axis - 1);
    seeds.push_back(x);
  }

  for (std::size_t s = 0; s < seeds.size(); ++s) {
    CharState init = CharState::start(seeds[s], u0->gradient(seeds[s]), u0->hessian(seeds[s]));
    std::vector<CharState> traj = flow_trajectory(sys, path, init, 0.0, times, mode);
    for (std::size_t k = 0; k < times.size(); ++k) {
      csv << s;
      for (int d = 0; d < c.dim; ++d) csv << "," << format_g17(seeds[s][d]);
      csv << "," << format_g17(times[k]);
      for (int d = 0; d < c.dim; ++d) csv << "," << format_g17(traj[k].x[d]);
      for (int d = 0; d < c.dim; ++d) csv << "," << format_g17(traj[k].p[d]);
      csv << "," << format_g17(traj[k].z) << "," << format_g17(det(traj[k].jx)) << "\n";
    }
  }
  write_text_file(ctx.path("flow.csv"), csv.str());
  ctx.artifact("flow.csv");
  ctx.note("flow: " + std::to_string(seeds.size()) + " characteristics, mode " +
           flow_mode_name(mode));
  return 0;
}

// --------------------------------------------------------------- local ----

GridSpec config_grid(const RunConfig& c) {
  VecN lo(c.dim);
  for (int d = 0; d < c.dim; ++d) lo[d] = c.box_lo;
  std::array<int, kMaxDim> shape{};
  for (int d = 0; d < c.dim; ++d) shape[d] = c.nodes;
  return GridSpec::make(lo, (c.box_hi - c.box_lo) / (c.nodes - 1), shape, c.dim);
}

int run_local(RunContext& ctx) {
  const RunConfig& c = ctx.cfg;
  GeometricRoughPath path = build_path(c);
  HamiltonianSystem sys = build_hamiltonians(c);
  ScalarFieldPtr u0 = build_u0(c);
  GridSpec grid = config_grid(c);
  LocalOperatorOptions lop;
  lop.theta_inv = c.theta_inv;

  HorizonReport hr = local_horizon(sys, path, *u0, 0.0, grid, lop);
  write_json_report(ctx.path("horizon.json"), hr);
  ctx.artifact("horizon.json");
  ctx.line("horizon h_forward", sci(hr.h_forward), "> 0", hr.h_forward > 0.0);

  FieldSeries series;
  for (double t : output_times(c)) {
    if (t <= 0.0 || t > hr.h_forward + 1e-12) continue;
    LocalSnapshot snap = local_apply(sys, path, *u0, 0.0, t, grid, lop);
    series.times.push_back(t);
    series.frames.push_back(snap.phi);
  }
  if (series.times.empty()) {
    ctx.note("local: no output times inside the horizon");
  } else {
    write_series_csv(ctx.out_dir, "local", series);
    ctx.artifact("local_times.csv");
    for (std::size_t i = 0; i < series.times.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "local_%03zu.csv", i);
      ctx.artifact(name);
    }
  }
  return ctx.all_passed ? 0 : 1;
}

// --------------------------------------------------------------- solve ----

int run_solve(RunContext& ctx) {
  const RunConfig& c = ctx.cfg;
  PDEProblem prob = build_problem(c);
  std::vector<double> times = output_times(c);

  if (c.levels >= 2 && c.path_source != "formula") {
    RoughSolveReport rep = solve_rough(prob, c.levels, times);
    write_series_csv(ctx.out_dir, "u", to_series(rep.finest));
    write_json_report(ctx.path("solve_report.json"), rep.finest);
    write_json_report(ctx.path("cauchy_report.json"), rep);
    ctx.artifact("solve_report.json");
    ctx.artifact("cauchy_report.json");
    std::string ds;
    for (double d : rep.cauchy.d) ds += (ds.empty() ? "" : " > ") + sci(d);
    ctx.line("cauchy distances", ds.empty() ? "-" : ds, "decreasing",
             rep.cauchy.decreasing || rep.cauchy.d.empty());
    ctx.artifact("u_times.csv");
    for (std::size_t i = 0; i < rep.finest.times.size(); ++i) {
      char name[24];
      std::snprintf(name, sizeof name, "u_%03zu.csv", i);
      ctx.artifact(name);
    }
  } else {
    SolveReport rep = solve_smooth(prob, times);
    write_series_csv(ctx.out_dir, "u", to_series(rep));
    write_json_report(ctx.path("solve_report.json"), rep);
    ctx.artifact("solve_report.json");
    ctx.note("solve: lambda " + sci(rep.lambda) + ", required dt " + sci(rep.required_dt) +
             ", max substeps " + std::to_string(rep.max_substeps));
    ctx.artifact("u_times.csv");
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
      char name[24];
      std::snprintf(name, sizeof name, "u_%03zu.csv", i);
      ctx.artifact(name);
    }
  }
  return ctx.all_passed ? 0 : 1;
}

// -------------------------------------------------------------- verify ----

/// Spatial translate by whole cells; vacated nodes keep the edge value.
FieldSeries translate_series(const FieldSeries& s, int axis, int cells) {
  FieldSeries out = s;
  const GridSpec& g = s.grid();
  for (std::size_t i = 0; i < s.frames.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      auto idx = g.unflat(j);
      int src = idx[axis] - cells;
      if (src < 0) src = 0;
      if (src > g.shape[axis] - 1) src = g.shape[axis] - 1;
      auto sidx = idx;
      sidx[axis] = src;
      out.frames[i][j] = s.frames[i][g.flat(sidx)];
    }
  }
  return out;
}

bool series_equal(const FieldSeries& a, const FieldSeries& b) {
  for (std::size_t i = 0; i < a.frames.size(); ++i)
    for (std::size_t j = 0; j < a.frames[i].size(); ++j)
      if (a.frames[i][j] != b.frames[i][j]) return false;
  return true;
}

int run_verify(RunContext& ctx) {
  const RunConfig& c = ctx.cfg;
  GeometricRoughPath path = build_path(c);
  HamiltonianSystem sys = build_hamiltonians(c);
  FOperator F = build_f(c);
  ScalarFieldPtr u0 = build_u0(c);
  GridSpec grid = config_grid(c);
  const int n = c.dim;
  const double dx = grid.dx;
  const double tol = c.tol;
  VecN center(n);
  for (int d = 0; d < n; ++d) center[d] = 0.5 * (c.box_lo + c.box_hi);

  // 1. path validity
  {
    PathValidationReport rep = validate_path(path);
    double ptol = c.path_source == "file" ? 1e-10 : 1e-12;
    write_json_report(ctx.path("lift_report.json"), rep);
    ctx.artifact("lift_report.json");
    ctx.line("path chen defect", sci(rep.max_chen_defect), sci(ptol),
             rep.max_chen_defect <= ptol);
    ctx.line("path geometric defect", sci(rep.max_geometric_defect), sci(ptol),
             rep.max_geometric_defect <= ptol);
  }

  // 2. Hamiltonian derivative consistency
  {
    SampleBox box;
    box.p_lo = VecN(n);
    box.p_hi = VecN(n);
    box.x_lo = VecN(n);
    box.x_hi = VecN(n);
    for (int d = 0; d < n; ++d) {
      box.p_lo[d] = -2.0;
      box.p_hi[d] = 2.0;
      box.x_lo[d] = c.box_lo;
      box.x_hi[d] = c.box_hi;
    }
    double worst = 0.0;
    for (int i = 0; i < sys.m(); ++i)
      worst = std::max(worst, hamiltonian_derivative_defect(sys.component(i), box));
    ctx.line("H derivative defect", sci(worst), sci(1e-6), worst <= 1e-6);
    if (sys.m() >= 2) {
      CommutationReport cr = commutation_check(sys, box);
      ctx.line("H pairwise brackets", sci(cr.max_defect), "commute",
               cr.commutes);
    }
  }

  // The flat data pair used for the operator checks: a quadratic and a
  // linear datum, both gentle enough to keep the flow well inside the
  // horizon on the whole window.
  VecN b1(n), b2(n);
  b1[0] = 0.2;
  b2[0] = -0.25;
  MatN A1 = 0.3 * MatN::identity(n);
  auto quad = quadratic_field(n, 0.3 + dot(b1, -1.0 * center) + 0.15 * dot(center, center),
                              b1 + (-0.3) * center, A1);
  auto lin = quadratic_field(n, dot(b2, -1.0 * center), b2, MatN(n, n));

  LocalOperatorOptions lop;
  lop.theta_inv = c.theta_inv;

  // 3. operator properties: shift, comparison, semigroup
  {
    std::vector<double> times = {0.25 * c.T, 0.5 * c.T, 0.75 * c.T};
    PropertyReport rep = check_properties(sys, path, *quad, *lin, 0.75, 0.0, times, grid, lop);
    write_json_report(ctx.path("properties.json"), rep);
    ctx.artifact("properties.json");
    double bound = 5.0 * dx * dx;
    ctx.line("S shift defect", sci(rep.shift_defect), sci(1e-10), rep.shift_defect <= 1e-10);
    ctx.line("S comparison defect", sci(rep.max_comparison()), sci(bound),
             rep.max_comparison() <= bound);
    ctx.line("S semigroup defect", sci(rep.max_semigroup()), sci(bound),
             rep.max_semigroup() <= bound);
  }

  // 4. domain of dependence on a centered annulus
  {
    double w = 0.5 * (c.box_hi - c.box_lo);
    AnnulusSpec K{center, 0.3 * w, 0.8 * w};
    DependenceReport rep =
        domain_of_dependence_check(sys, path, *quad, *lin, 0.0, 0.5 * c.T, K, 2.0, grid, lop);
    write_json_report(ctx.path("dependence.json"), rep);
    ctx.artifact("dependence.json");
    double bound = 5.0 * dx * dx;
    ctx.line("locality defect", sci(rep.defect), sci(bound),
             rep.defect <= bound && !rep.shrunken_empty);
  }

  // 5. horizon of the configured datum
  {
    HorizonReport hr = local_horizon(sys, path, *u0, 0.0, grid, lop);
    write_json_report(ctx.path("horizon.json"), hr);
    ctx.artifact("horizon.json");
    ctx.line("horizon h_forward", sci(hr.h_forward), "> 0", hr.h_forward > 0.0);
  }

  // 6. solve + sandwich + ordered-pair comparison
  PDEProblem prob{F, sys, path, u0, c.T, grid, c.dt, c.p_bound};
  std::vector<double> times = output_times(c);
  if (times.front() > 1e-12) times.insert(times.begin(), 0.0);
  SolveReport solved = solve_smooth(prob, times);
  FieldSeries u = to_series(solved);
  {
    SubSuperOptions sopts;
    sopts.local = lop;
    SubSuperPair pair = build_sub_super(prob, *u0, times, sopts);
    write_json_report(ctx.path("subsuper.json"), pair);
    ctx.artifact("subsuper.json");
    CompareReport lo = compare(lower_series(pair), u);
    CompareReport hi = compare(u, upper_series(pair));
    write_json_report(ctx.path("sandwich_lower.json"), lo);
    write_json_report(ctx.path("sandwich_upper.json"), hi);
    ctx.artifact("sandwich_lower.json");
    ctx.artifact("sandwich_upper.json");
    double worst = 0.0;
    for (double e : lo.excess) worst = std::max(worst, e);
    for (double e : hi.excess) worst = std::max(worst, e);
    ctx.line("sandwich defect", sci(worst), sci(tol), worst <= tol);

    // ordered initial data stay ordered under the monotone scheme
    PDEProblem prob2 = prob;
    std::string patch = "0.3*exp(-8.0*(x1-" + format_g17(center[0] + 0.35) + ")^2)";
    prob2.u0 = expr_field(n, "(" + c.u0_expr + ")+(" + patch + ")");
    prob2.p_bound = solved.p_bound + 1.0;
    PDEProblem prob1 = prob;
    prob1.p_bound = prob2.p_bound;
    SolveReport solved1 = solve_smooth(prob1, times);
    SolveReport solved2 = solve_smooth(prob2, times);
    CompareReport ord = compare(to_series(solved1), to_series(solved2), tol);
    CompareReport rev = compare(to_series(solved2), to_series(solved1), tol);
    write_json_report(ctx.path("ordered_pair.json"), rev);
    ctx.artifact("ordered_pair.json");
    double fwd_worst = 0.0;
    for (double e : ord.excess) fwd_worst = std::max(fwd_worst, e);
    ctx.line("ordered pair stays ordered", sci(fwd_worst), sci(tol), fwd_worst <= tol);
    ctx.line("ordered pair excess monotone", sci(rev.initial), "vs t0",
             rev.nonincreasing_vs_initial);

    // 7. test-function probes: lower passes as a sub-solution, upper fails.
    // Each probe is aimed so the argmax of u - S phi - psi sits strictly
    // inside the ball and window: phi matches the frame's gradient at a node
    // and exceeds its Hessian by 0.5 I, psi' matches the barrier's time
    // slope at t0 with a positive quadratic bend.
    double t_mid = times[times.size() / 2];
    std::size_t mid = times.size() / 2;
    double hwin = std::min(0.45 * c.T, t_mid - times.front() + 1e-9);
    int koff = std::max(2, c.nodes / 8);
    auto aimed_probe = [&](const FieldSeries& s, int cells_off, double slope) {
      TestFunctionProbe pr;
      pr.t0 = t_mid;
      pr.x0 = center;
      pr.x0[0] += cells_off * dx;
      std::array<int, kMaxDim> idx{};
      for (int d = 0; d < n; ++d)
        idx[d] = static_cast<int>(std::lround((pr.x0[d] - grid.lo[d]) / dx));
      std::size_t node = grid.flat(idx);
      const GridField& frame = s.frames[mid];
      VecN g0 = node_gradient(frame, node);
      MatN A = node_hessian(frame, node) + 0.5 * MatN::identity(n);
      double c0 =
          frame[node] - dot(g0, pr.x0) + 0.5 * dot(matvec(A, pr.x0), pr.x0);
      pr.phi = quadratic_field(n, c0, g0 + (-1.0) * matvec(A, pr.x0), A);
      pr.a = slope;
      pr.b = 0.5;
      pr.r = 3.2 * dx;
      pr.h = hwin;
      return pr;
    };
    SubsolutionOptions sub_opts;
    sub_opts.tol = tol;
    sub_opts.local = lop;
    FieldSeries lower = lower_series(pair);
    FieldSeries upper = upper_series(pair);
    std::vector<TestFunctionProbe> probes_lo, probes_hi;
    for (int k = -1; k <= 1; ++k) {
      probes_lo.push_back(aimed_probe(lower, k * koff, pair.C_lower));
      probes_hi.push_back(aimed_probe(upper, k * koff, pair.C_upper));
    }
    SubsolutionReport sr = check_subsolution(lower, probes_lo, F, sys, path, sub_opts);
    write_json_report(ctx.path("subsolution_lower.json"), sr);
    ctx.artifact("subsolution_lower.json");
    bool lo_interior = false;
    for (const auto& p : sr.probes) lo_interior = lo_interior || p.interior;
    ctx.line("lower subsolution violation", sci(sr.max_violation), sci(tol),
             sr.max_violation <= tol && lo_interior);

    SubsolutionReport su = check_subsolution(upper, probes_hi, F, sys, path, sub_opts);
    write_json_report(ctx.path("subsolution_upper.json"), su);
    ctx.artifact("subsolution_upper.json");
    ctx.line("upper fails as sub-solution", sci(su.max_violation), "> 10 tol",
             su.max_violation > 10.0 * tol);

    // 8. envelope identities and translated family
    bool x_dep = !sys.x_independent();
    FieldSeries env_same = envelope({lower, lower});
    FieldSeries shifted_down = lower;
    for (auto& fr : shifted_down.frames)
      for (std::size_t j = 0; j < fr.size(); ++j) fr[j] -= 1.0;
    FieldSeries env_ord = envelope({lower, shifted_down});
    ctx.line("envelope identities", "exact", "-",
             series_equal(env_same, lower) && series_equal(env_ord, lower));
    if (x_dep) {
      ctx.note("envelope translate check skipped (x-dependent Hamiltonian)");
    } else {
      int cells = std::max(1, c.nodes / 16);
      FieldSeries env =
          envelope({lower, translate_series(lower, 0, cells), translate_series(lower, 0, -cells)});
      std::vector<TestFunctionProbe> probes_env;
      for (int k = -1; k <= 1; ++k)
        probes_env.push_back(aimed_probe(env, k * koff, pair.C_lower));
      SubsolutionReport se = check_subsolution(env, probes_env, F, sys, path, sub_opts);
      write_json_report(ctx.path("subsolution_envelope.json"), se);
      ctx.artifact("subsolution_envelope.json");
      ctx.line("envelope subsolution violation", sci(se.max_violation), sci(tol),
               se.max_violation <= tol);
    }
  }

  // 9. bump certificate with the frozen constants
  {
    double half_width = 0.5 * (c.box_hi - c.box_lo);
    if (c.T < 0.36 || half_width < 0.6) {
      ctx.note("bump check skipped (window needs T >= 0.36 and box half-width >= 0.6)");
    } else {
      BumpSpec bs;  // gamma 0.1, r 0.4, s 0.2
      double t0 = 0.5 * c.T;
      FieldSeries w;
      MatN Ab = 0.3 * MatN::identity(n);
      VecN bb(n);
      bb[0] = 0.2;
      auto phib = quadratic_field(
          n, 0.3 + dot(bb, -1.0 * center) + 0.15 * dot(center, center), bb + (-0.3) * center, Ab);
      for (int k = -7; k <= 7; ++k) {
        double t = t0 + 0.025 * k;
        if (t < 0.0 || t > c.T) continue;
        w.times.push_back(t);
        if (k == 0) {
          GridField f(grid);
          for (std::size_t j = 0; j < grid.size(); ++j) f[j] = phib->value(grid.coord(j));
          w.frames.push_back(f);
        } else {
          w.frames.push_back(local_apply(sys, path, *phib, t0, t, grid, lop).phi);
        }
      }
      TestFunctionProbe pr;
      pr.x0 = center;
      pr.t0 = t0;
      pr.phi = phib;
      pr.a = 0.0;
      pr.b = -0.4;
      pr.r = bs.r;
      pr.h = 0.25;
      BumpOptions bo;
      bo.tol = tol;
      bo.local = lop;
      BumpResult br = bump(sys, path, F, w, pr, bs, 0.5, bo);
      write_json_report(ctx.path("bump.json"), br.cert);
      ctx.artifact("bump.json");
      ctx.line("bump delta", format_g17(br.cert.delta), "0.001",
               std::fabs(br.cert.delta - 0.001) <= 1e-15);
      ctx.line("bump collar slacks", sci(br.cert.slack_time) + " " + sci(br.cert.slack_space),
               "2.5e-3 1e-3",
               std::fabs(br.cert.slack_time - 2.5e-3) <= 1e-15 &&
                   std::fabs(br.cert.slack_space - 1e-3) <= 1e-15);
      ctx.line("bump certificate", br.cert.passed ? "passed" : "failed", "-",
               br.cert.passed && !br.cert.refused);
    }
  }

  // 10. dyadic Cauchy tail
  {
    std::size_t samples = path.sample_count();
    int lv = c.levels;
    bool divisible = lv >= 2 && (samples - 1) % (1u << (lv - 1)) == 0;
    if (!divisible) {
      ctx.note("cauchy check skipped (sample count not dyadic for the level count)");
    } else {
      RoughSolveReport rr = solve_rough(prob, lv, times);
      write_json_report(ctx.path("cauchy_report.json"), rr);
      ctx.artifact("cauchy_report.json");
      double dmax = 0.0;
      for (double d : rr.cauchy.d) dmax = std::max(dmax, d);
      bool ok = rr.cauchy.decreasing || dmax <= tol;
      ctx.line("cauchy tail", sci(rr.cauchy.d.empty() ? 0.0 : rr.cauchy.d.back()),
               "decreasing", ok);
    }
  }

  return ctx.all_passed ? 0 : 1;
}

int dispatch(RunContext& ctx) {
  if (ctx.subcommand == "lift") return run_lift(ctx);
  if (ctx.subcommand == "flow") return run_flow(ctx);
  if (ctx.subcommand == "local") return run_local(ctx);
  if (ctx.subcommand == "solve") return run_solve(ctx);
  if (ctx.subcommand == "verify") return run_verify(ctx);
  int rc = 0;
  for (const char* sub : {"lift", "local", "solve", "verify"}) {
    ctx.subcommand = sub;
    std::printf("== %s ==\n", sub);
    int r = dispatch(ctx);
    if (r != 0) rc = r;
  }
  ctx.subcommand = "all";
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pathwise viscosity solution toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_override;
  std::uint64_t seed = 0;
  int levels = 0;
  std::vector<CLI::Option*> seed_opts, levels_opts;

  for (const char* name : {"lift", "flow", "local", "solve", "verify", "all"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "run configuration file")->required();
    sub->add_option("--out", out_override, "output directory (overrides config)");
    seed_opts.push_back(sub->add_option("--seed", seed, "path seed (overrides config)"));
    levels_opts.push_back(sub->add_option("--levels", levels, "dyadic levels (overrides config)"));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  RunContext ctx;
  try {
    ctx.config_text = read_text_file(config_path);
    ctx.cfg = parse_config(ctx.config_text);
    bool seed_set = false, levels_set = false;
    for (CLI::Option* o : seed_opts) seed_set = seed_set || o->count() > 0;
    for (CLI::Option* o : levels_opts) levels_set = levels_set || o->count() > 0;
    if (seed_set) ctx.cfg.path_seed = seed;
    if (levels_set) ctx.cfg.levels = levels;
    ctx.out_dir = out_override.empty() ? ctx.cfg.out_dir : out_override;
    ctx.subcommand = app.get_subcommands().front()->get_name();
    std::filesystem::create_directories(ctx.out_dir);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }

  int rc;
  try {
    rc = dispatch(ctx);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const StepRestrictionError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    std::fprintf(stderr, "required dt <= %.17g\n", e.required_dt);
    return 3;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  }

  std::string table;
  for (const std::string& s : ctx.summary) table += s + "\n";
  if (!table.empty()) {
    write_text_file(ctx.path("summary.txt"), table);
    ctx.artifact("summary.txt");
  }
  write_manifest(ctx);
  std::printf("%s: %s\n", ctx.subcommand.c_str(), rc == 0 ? "ok" : "FAILED");
  return rc;
}
