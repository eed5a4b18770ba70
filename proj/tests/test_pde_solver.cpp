#include <cmath>
#include <vector>

#include "doctest.h"
#include "pvs/errors.hpp"
#include "pvs/pde_solver.hpp"
#include "pvs/rough_path.hpp"

using namespace pvs;

namespace {

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

HamiltonianSystem no_h() { return HamiltonianSystem({x_independent_hamiltonian(1, "0.0*p1")}); }

double sup_diff(const GridField& a, const GridField& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::fabs(a[i] - b[i]));
  return worst;
}

// Blank problem; every case overwrites the fields it cares about.
PDEProblem problem() {
  return PDEProblem{f_zero(), no_h(), ramp1(0.2, 0.5, 64), expr_field(1, "0"),
                    1.0,      grid1(-1.0, 1.0, 65),        1e-3, -1.0};
}

}  // namespace

TEST_CASE("pure diffusion matches the heat kernel") {
  // u0 = exp(-x^2 / (2 s0^2)) spreads to s0/s(t) exp(-x^2 / (2 s(t)^2)),
  // s(t)^2 = s0^2 + 2t, under u_t = u_xx.
  PDEProblem prob = problem();
  prob.F = f_heat(1.0);
  prob.sys = no_h();
  prob.path = ramp1(0.2, 0.5, 256);
  prob.u0 = expr_field(1, "exp(-2.0*x1^2)");
  prob.T = 0.1;
  prob.grid = grid1(-3.0, 3.0, 129);
  prob.dt = 1e-3;
  SolveReport rep = solve_smooth(prob, {0.0, 0.1});
  const GridField& u = rep.at(0.1);
  double s2 = 0.25 + 2.0 * 0.1;
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double x = prob.grid.coord(i)[0];
    double exact = std::sqrt(0.25 / s2) * std::exp(-x * x / (2.0 * s2));
    worst = std::max(worst, std::fabs(u[i] - exact));
  }
  CHECK(worst <= 4e-4);

  const GridField& u0f = rep.at(0.0);
  for (std::size_t i = 0; i < u0f.size(); ++i)
    CHECK(std::fabs(u0f[i] - prob.u0->value(prob.grid.coord(i))) <= 1e-15);
}

TEST_CASE("zero hamiltonian makes the march path independent") {
  PDEProblem prob = problem();
  prob.F = f_heat(0.5);
  prob.sys = no_h();
  prob.u0 = expr_field(1, "exp(-2.0*x1^2)");
  prob.T = 0.1;
  prob.grid = grid1(-3.0, 3.0, 65);
  prob.dt = 1e-3;
  prob.path = ramp1(0.2, 0.5, 128);
  SolveReport a = solve_smooth(prob, {0.1});
  prob.path = brownian_lift(3, 1, 0.5, 512);
  SolveReport b = solve_smooth(prob, {0.1});
  CHECK(sup_diff(a.at(0.1), b.at(0.1)) <= 1e-13);
}

TEST_CASE("front tracking against the variational formula") {
  // u_t = (1/2) |Du|^2 dW/dt with a concave tent datum: the solution is
  // sup_y [u0(y) - |x - y|^2 / (2 c t)] with c the ramp slope.
  PDEProblem prob = problem();
  prob.F = f_zero();
  prob.sys = kinetic1();
  prob.path = ramp1(0.5, 0.5, 256);
  prob.u0 = expr_field(1, "0.75*(2.0-sqrt(x1^2))");
  prob.T = 0.25;
  prob.grid = grid1(-2.0, 2.0, 257);
  prob.dt = 1e-3;
  prob.p_bound = 1.0;
  SolveReport rep = solve_smooth(prob, {0.25});
  const GridField& u = rep.at(0.25);
  double ct = 0.5 * 0.25;
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double x = prob.grid.coord(i)[0];
    double best = -1e300;
    for (int k = 0; k <= 8000; ++k) {
      double y = -4.0 + 8.0 * k / 8000;
      double val = 0.75 * (2.0 - std::fabs(y)) - (x - y) * (x - y) / (2.0 * ct);
      best = std::max(best, val);
    }
    worst = std::max(worst, std::fabs(u[i] - best));
  }
  CHECK(worst <= 0.035);
}

TEST_CASE("constant drift is integrated exactly") {
  PDEProblem prob = problem();
  prob.F = f_constant(0.4);
  prob.sys = no_h();
  prob.path = ramp1(0.2, 0.5, 64);
  prob.u0 = expr_field(1, "0.3*sin(x1)");
  prob.T = 0.2;
  prob.grid = grid1(-1.0, 1.0, 65);
  prob.dt = 1e-3;
  SolveReport rep = solve_smooth(prob, {0.2});
  const GridField& u = rep.at(0.2);
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double x = prob.grid.coord(i)[0];
    worst = std::max(worst, std::fabs(u[i] - (0.3 * std::sin(x) + 0.4 * 0.2)));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("constant shifts ride through the scheme") {
  PDEProblem prob = problem();
  prob.F = f_heat(1.0);
  prob.sys = kinetic1();
  prob.path = ramp1(0.5, 0.5, 256);
  prob.u0 = expr_field(1, "0.5*exp(-2.0*x1^2)");
  prob.T = 0.1;
  prob.grid = grid1(-3.0, 3.0, 129);
  prob.dt = 5e-4;
  prob.p_bound = 3.0;
  SolveReport base = solve_smooth(prob, {0.1});
  prob.u0 = expr_field(1, "0.5*exp(-2.0*x1^2)+0.7");
  SolveReport shifted = solve_smooth(prob, {0.1});
  double worst = 0.0;
  const GridField& a = base.at(0.1);
  const GridField& b = shifted.at(0.1);
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::fabs(b[i] - a[i] - 0.7));
  CHECK(worst <= 1e-12);
}

TEST_CASE("ordered data stay ordered") {
  PDEProblem prob = problem();
  prob.F = f_heat(1.0);
  prob.sys = kinetic1();
  prob.path = ramp1(0.5, 0.5, 256);
  prob.u0 = expr_field(1, "0.5*exp(-2.0*x1^2)");
  prob.T = 0.2;
  prob.grid = grid1(-3.0, 3.0, 129);
  prob.dt = 5e-4;
  prob.p_bound = 3.0;
  std::vector<double> times = {0.05, 0.1, 0.15, 0.2};
  SolveReport lo = solve_smooth(prob, times);
  prob.u0 = expr_field(1, "0.5*exp(-2.0*x1^2)+0.3*exp(-8.0*(x1-0.35)^2)");
  SolveReport hi = solve_smooth(prob, times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    double excess = 0.0;
    const GridField& a = lo.frames[k];
    const GridField& b = hi.frames[k];
    for (std::size_t i = 0; i < a.size(); ++i) excess = std::max(excess, a[i] - b[i]);
    CHECK(excess <= 1e-12);
  }
}

TEST_CASE("parabolic step restriction is enforced with a usable bound") {
  PDEProblem prob = problem();
  prob.F = f_heat(1.0);
  prob.sys = no_h();
  prob.path = ramp1(0.2, 0.5, 64);
  prob.u0 = expr_field(1, "exp(-2.0*x1^2)");
  prob.T = 0.1;
  prob.grid = grid1(-3.0, 3.0, 129);
  prob.dt = 5e-3;
  try {
    solve_smooth(prob, {0.1});
    FAIL("expected a step restriction");
  } catch (const StepRestrictionError& e) {
    CHECK(e.required_dt > 0.0);
    CHECK(e.required_dt < 5e-3);
    prob.dt = 0.9 * e.required_dt;
    CHECK_NOTHROW(solve_smooth(prob, {0.1}));
  }
}

TEST_CASE("steep path increments trigger substepping") {
  PDEProblem prob = problem();
  prob.F = f_zero();
  prob.sys = kinetic1();
  prob.path = ramp1(40.0, 0.1, 512);
  prob.u0 = expr_field(1, "0.5*exp(-2.0*x1^2)");
  prob.T = 0.05;
  prob.grid = grid1(-3.0, 3.0, 65);
  prob.dt = 1e-3;
  prob.p_bound = 3.0;
  SolveReport rep = solve_smooth(prob, {0.05});
  CHECK(rep.max_substeps >= 2);
  CHECK(rep.total_substeps > static_cast<long long>(0.05 / prob.dt));
}

TEST_CASE("dyadic subsampling contracts toward the rough limit") {
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
  REQUIRE(rep.cauchy.d.size() == 3);
  REQUIRE(rep.cauchy.strides.size() == 4);
  CHECK(rep.cauchy.strides.front() == 8);
  CHECK(rep.cauchy.strides.back() == 1);
  CHECK(rep.cauchy.d[0] > rep.cauchy.d[1]);
  CHECK(rep.cauchy.d[1] > rep.cauchy.d[2]);
  CHECK(rep.cauchy.d[2] <= 0.5 * rep.cauchy.d[0]);
  CHECK(rep.cauchy.decreasing);
}

TEST_CASE("smooth paths collapse the refinement ladder") {
  PDEProblem prob = problem();
  prob.F = f_zero();
  prob.sys = kinetic1();
  prob.path = ramp1(0.5, 0.5, 1024);
  prob.u0 = expr_field(1, "0.5*exp(-2.0*x1^2)");
  prob.T = 0.2;
  prob.grid = grid1(-3.0, 3.0, 65);
  prob.dt = 1e-3;
  prob.p_bound = 3.0;
  RoughSolveReport rep = solve_rough(prob, 3, {0.2});
  for (double d : rep.cauchy.d) CHECK(d <= 1e-4);
}

TEST_CASE("explicit barriers enclose the marched solution") {
  PDEProblem prob = problem();
  prob.F = f_heat(1.0);
  prob.sys = kinetic1();
  prob.path = ramp1(0.5, 0.5, 256);
  prob.u0 = expr_field(1, "0.5*exp(-2.0*x1^2)");
  prob.T = 0.2;
  prob.grid = grid1(-3.0, 3.0, 129);
  prob.dt = 5e-4;
  prob.p_bound = 3.0;
  std::vector<double> times = {0.0, 0.05, 0.1, 0.15, 0.2};
  SolveReport sol = solve_smooth(prob, times);
  SubSuperPair pair = build_sub_super(prob, *prob.u0, times);

  CHECK(pair.R > 0.0);
  CHECK(pair.C_lower == doctest::Approx(-pair.R).epsilon(1e-12));
  CHECK(pair.C_upper == doctest::Approx(pair.R).epsilon(1e-12));
  CHECK(pair.f_samples >= 4096);
  REQUIRE(pair.times == times);

  for (std::size_t k = 0; k < times.size(); ++k) {
    double lo_violation = 0.0, hi_violation = 0.0;
    const GridField& u = sol.frames[k];
    for (std::size_t i = 0; i < u.size(); ++i) {
      lo_violation = std::max(lo_violation, pair.lower[k][i] - u[i]);
      hi_violation = std::max(hi_violation, u[i] - pair.upper[k][i]);
    }
    CHECK(lo_violation <= 1e-9);
    CHECK(hi_violation <= 1e-9);
  }

  // At t = 0 both barriers collapse onto the datum.
  CHECK(sup_diff(pair.lower.front(), sol.frames.front()) <= 1e-12);
  CHECK(sup_diff(pair.upper.front(), sol.frames.front()) <= 1e-12);
}

TEST_CASE("barrier blocks restart past the invertibility horizon") {
  PDEProblem prob = problem();
  prob.F = f_constant(0.25);
  prob.sys = kinetic1();
  prob.path = ramp1(1.0, 1.0, 256);
  prob.u0 = expr_field(1, "x1^2");
  prob.T = 0.7;
  prob.grid = grid1(-1.0, 1.0, 65);
  prob.dt = 1e-3;
  prob.p_bound = 3.0;
  SubSuperPair pair = build_sub_super(prob, *prob.u0, {0.0, 0.2, 0.5, 0.7});
  // det = 1 - 2 tau crosses 0.1 at tau = 0.45, so one restart block remains.
  CHECK(pair.h == doctest::Approx(0.45).epsilon(0.02));
  CHECK(pair.h0 == doctest::Approx(prob.T - pair.h).epsilon(1e-9));
  CHECK(pair.M_lower.size() == 1);
  CHECK(pair.M_upper.size() == 1);
  CHECK(pair.C_lower == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(pair.C_upper == doctest::Approx(0.25).epsilon(1e-12));
  for (std::size_t k = 0; k < pair.times.size(); ++k) {
    double cross = 0.0;
    for (std::size_t i = 0; i < pair.lower[k].size(); ++i)
      cross = std::max(cross, pair.lower[k][i] - pair.upper[k][i]);
    CHECK(cross <= 1e-9);
  }
}
