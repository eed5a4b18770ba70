// Times the OpenMP kernels against their serial reference implementations
// and checks that the two produce bitwise identical results.
#include <chrono>
#include <cstdio>
#include <cstring>

#include "pvs/hamiltonian.hpp"
#include "pvs/local_solver.hpp"
#include "pvs/pde_solver.hpp"
#include "pvs/rough_path.hpp"

using namespace pvs;

namespace {

double now() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

template <typename F>
double time_of(F&& f, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    double t0 = now();
    f();
    best = std::min(best, now() - t0);
  }
  return best;
}

void row(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-22s %10.4f ms %10.4f ms %8.2fx   %s\n", name, serial * 1e3, parallel * 1e3,
              serial / parallel, identical ? "identical" : "MISMATCH");
}

bool same(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

int main() {
  int reps = 3;
  std::printf("%-22s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

  GeometricRoughPath path = brownian_lift(7, 2, 1.0, 4096);
  {
    PathValidationReport rs, rp;
    double ts = time_of([&] { rs = validate_path(path, Exec::serial); }, reps);
    double tp = time_of([&] { rp = validate_path(path, Exec::parallel); }, reps);
    row("validate_path", ts, tp,
        rs.max_chen_defect == rp.max_chen_defect &&
            rs.max_geometric_defect == rp.max_geometric_defect);
  }
  {
    double hs = 0, hp = 0;
    double ts = time_of([&] { hs = holder_norm(path, 0.4, Exec::serial); }, reps);
    double tp = time_of([&] { hp = holder_norm(path, 0.4, Exec::parallel); }, reps);
    row("holder_norm", ts, tp, hs == hp);
  }

  HamiltonianSystem sys({kinetic_hamiltonian(1), separated_hamiltonian(expr_field(1, "sin(x1)"))});
  GeometricRoughPath drive = brownian_lift(11, 2, 0.25, 1024);
  VecN lo(1);
  lo[0] = -2.0;
  std::array<int, kMaxDim> shape{};
  shape[0] = 513;
  GridSpec grid = GridSpec::make(lo, 4.0 / 512, shape, 1);
  auto phi = expr_field(1, "0.5*exp(-x1^2)");
  {
    LocalOperatorOptions os, op;
    os.exec = Exec::serial;
    op.exec = Exec::parallel;
    LocalSnapshot ss, sp;
    double ts = time_of([&] { ss = local_apply(sys, drive, *phi, 0.0, 0.1, grid, os); }, reps);
    double tp = time_of([&] { sp = local_apply(sys, drive, *phi, 0.0, 0.1, grid, op); }, reps);
    row("local_apply", ts, tp, same(ss.phi.v, sp.phi.v));
  }
  {
    PDEProblem prob{f_heat(0.5), sys, drive, phi, 0.1, grid, 5e-5, 3.0};
    SolveReport rs, rp;
    double ts = time_of([&] { rs = solve_smooth(prob, {0.1}, Exec::serial); }, 1);
    double tp = time_of([&] { rp = solve_smooth(prob, {0.1}, Exec::parallel); }, 1);
    row("solve_smooth", ts, tp, same(rs.frames[0].v, rp.frames[0].v));
  }
  return 0;
}
