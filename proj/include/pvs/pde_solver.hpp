#pragma once

#include <cstdint>
#include <vector>

#include "pvs/exec.hpp"
#include "pvs/grid.hpp"
#include "pvs/hamiltonian.hpp"
#include "pvs/local_solver.hpp"
#include "pvs/rough_path.hpp"

namespace pvs {

/// Full initial value problem
///   du = F(D^2u, Du, u, x, t) dt + sum_i H^i(Du, x) dW^i,  u(., 0) = u0,
/// discretized on a fixed box with copy-out boundary.
struct PDEProblem {
  FOperator F;
  HamiltonianSystem sys;
  GeometricRoughPath path;
  ScalarFieldPtr u0;
  double T = 1.0;
  GridSpec grid;
  double dt = 1e-3;
  /// Gradient cap used for the dissipation bound. Negative means derive it
  /// from u0. Pin it explicitly when two runs must share one scheme.
  double p_bound = -1.0;
};

struct CFLRecord {
  double t;
  int substeps;
};

struct SolveReport {
  std::vector<double> times;
  std::vector<GridField> frames;
  double lambda = 0.0;       ///< sampled Lipschitz bound of F in the Hessian slot
  double required_dt = 0.0;  ///< parabolic step bound (0 = unconstrained)
  double p_bound = 0.0;      ///< gradient cap actually used
  int max_substeps = 0;
  long long total_substeps = 0;
  std::vector<CFLRecord> cfl;

  const GridField& at(double t) const;  ///< frame emitted at time t (exact match)
};

/// March the splitting scheme: per step, a monotone Lax-Friedrichs update
/// driven by the path increment, then an explicit Euler step for F with
/// upwinded gradients. Snapshots are emitted at out_times (default just T).
SolveReport solve_smooth(const PDEProblem& prob, const std::vector<double>& out_times = {},
                         Exec exec = Exec::parallel);

struct CauchyReport {
  std::vector<int> strides;  ///< sample stride per level, coarse to fine
  std::vector<double> d;     ///< d[k] = sup |u_k - u_{k+1}| over emitted frames
  bool decreasing = true;
};

struct RoughSolveReport {
  SolveReport finest;
  CauchyReport cauchy;
};

/// Run solve_smooth on piecewise-linear subsamplings of the path at dyadic
/// strides and report successive sup-differences. Returns the finest level;
/// non-Cauchy behavior is flagged, never asserted away.
RoughSolveReport solve_rough(const PDEProblem& prob, int levels,
                             const std::vector<double>& out_times = {},
                             Exec exec = Exec::parallel);

struct SubSuperOptions {
  int ball_samples = 4096;    ///< random probes of F over the norm ball
  std::uint64_t seed = 2026;  ///< sampler seed, recorded for reproducibility
  LocalOperatorOptions local;
};

/// Explicit barrier pair built from the local operator: on the first window
/// [0, h] the lower field is S(t,0)phi + t inf F and the upper one uses
/// sup F; past h it restarts from the zero datum on blocks of length h0,
/// shifted by the running bounds M_k so the jumps keep the right direction.
struct SubSuperPair {
  std::vector<double> times;
  std::vector<GridField> lower, upper;
  double R = 0.0;        ///< C^2 bound of S(.,0)phi over the first window
  double C_lower = 0.0;  ///< inf of F over the R-ball
  double C_upper = 0.0;  ///< sup of F over the R-ball
  double R0 = 0.0;       ///< C^2 bound of the zero-datum evolution
  double C0_lower = 0.0;
  double C0_upper = 0.0;
  double h = 0.0;   ///< first-window length (invertibility horizon of phi)
  double h0 = 0.0;  ///< block length past h
  std::vector<double> M_lower, M_upper;  ///< per-block restart shifts
  long long f_samples = 0;               ///< F probes used for the bounds

  const GridField& lower_at(double t) const;
  const GridField& upper_at(double t) const;
};

SubSuperPair build_sub_super(const PDEProblem& prob, const ScalarField& phi,
                             const std::vector<double>& times = {},
                             const SubSuperOptions& opts = {});

}  // namespace pvs
