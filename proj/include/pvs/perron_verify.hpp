#pragma once

#include <cstddef>
#include <vector>

#include "pvs/exec.hpp"
#include "pvs/grid.hpp"
#include "pvs/hamiltonian.hpp"
#include "pvs/local_solver.hpp"
#include "pvs/pde_solver.hpp"
#include "pvs/rough_path.hpp"

namespace pvs {

/// A grid field indexed by a shared time mesh. Discrete fields stand in for
/// the semicontinuous envelopes of the continuum theory: on a mesh the field
/// is its own upper and lower envelope.
struct FieldSeries {
  std::vector<double> times;
  std::vector<GridField> frames;

  const GridSpec& grid() const { return frames.front().spec; }
  std::size_t time_index(double t) const;  ///< exact-match lookup
};

FieldSeries to_series(const SolveReport& rep);
FieldSeries lower_series(const SubSuperPair& pair);
FieldSeries upper_series(const SubSuperPair& pair);

/// One test-function probe from the weak-solution definition: spatial part
/// phi evolved by the local operator from the anchor time, plus the time
/// part psi(t) = a (t - t0) + b (t - t0)^2 / 2.
struct TestFunctionProbe {
  VecN x0;
  double t0 = 0.0;
  ScalarFieldPtr phi;
  double a = 0.0;  ///< psi'(t0)
  double b = 0.0;  ///< psi''
  double r = 0.25;  ///< spatial window radius around x0
  double h = 0.1;   ///< temporal half-window, inside the S horizon

  double psi(double t) const { return a * (t - t0) + 0.5 * b * (t - t0) * (t - t0); }
  double dpsi(double t) const { return a + b * (t - t0); }
};

struct ProbeResult {
  std::size_t probe = 0;
  bool interior = false;  ///< argmax strictly inside the spatial window
  VecN x_star;
  double t_star = 0.0;
  double violation = 0.0;  ///< (psi'(t*) - F(...))_+ at the argmax, 0 if not interior
  bool flagged = false;    ///< violation beyond tolerance
};

struct SubsolutionReport {
  std::vector<ProbeResult> probes;
  double max_violation = 0.0;
};

struct SubsolutionOptions {
  double tol = 1e-6;
  LocalOperatorOptions local;
};

/// For each probe, locate the grid argmax of u - S(t,t0)phi - psi over the
/// window B_r(x0) x [t0-h, t0+h]; when it sits strictly inside the spatial
/// window, evaluate psi'(t*) - F(D2 phi', D phi', u, x*, t*) there with
/// phi' = S(t*,t0)phi and report the positive part.
SubsolutionReport check_subsolution(const FieldSeries& u,
                                    const std::vector<TestFunctionProbe>& probes,
                                    const FOperator& F, const HamiltonianSystem& sys,
                                    const GeometricRoughPath& path,
                                    const SubsolutionOptions& opts = {});

/// Pointwise maximum of finitely many sub-solution candidates on one mesh.
FieldSeries envelope(const std::vector<FieldSeries>& subs);

struct BumpSpec {
  double gamma = 0.1;
  double r = 0.4;
  double s = 0.2;
  double delta() const;  ///< gamma * min(r^2/16, s/8)
};

struct BumpOptions {
  double tol = 1e-6;            ///< scheme tolerance for the certificate
  double margin_factor = 10.0;  ///< strict-failure margin, in units of tol
  LocalOperatorOptions local;
};

struct BumpCertificate {
  bool refused = false;  ///< precondition failed: no strict super-solution failure
  double precondition_margin = 0.0;  ///< psi'(t0) - F(...) at the anchor
  double omega1 = 0.0, omega2 = 0.0;
  double R = 0.0, rho_R = 0.0;
  double delta = 0.0;
  double anchor_gain = 0.0;      ///< (w_kappa - w)(x0, t0), expected (1-gamma) delta
  double sup_gain = 0.0;         ///< sup over the mesh of w_kappa - w
  double collar_time_min = 0.0;  ///< min of w - what on the time collar
  double collar_space_min = 0.0;
  double slack_time = 0.0;   ///< gamma s / 8
  double slack_space = 0.0;  ///< gamma r^2 / 16
  bool unchanged_outside = false;
  bool passed = false;
  bool has_counterexample = false;
  VecN counterexample_x;
  double counterexample_t = 0.0;
};

struct BumpResult {
  FieldSeries w_kappa;
  BumpCertificate cert;
};

/// The bump construction: given w whose probe certifies a strict
/// super-solution failure at (x0, t0), raise it by
///   what(x,t) = w(x0,t0) + delta + S(t,t0)etahat(x) + a(t-t0)
///               - gamma (|t-t0|^2 + delta^2)^(1/2)
/// inside N_{7r/8, s} and certify the gain, the locality, and the strict
/// collar inequalities with their quantitative slacks.
BumpResult bump(const HamiltonianSystem& sys, const GeometricRoughPath& path, const FOperator& F,
                const FieldSeries& w, const TestFunctionProbe& probe, const BumpSpec& spec,
                double kappa, const BumpOptions& opts = {});

struct CompareReport {
  std::vector<double> times;
  std::vector<double> excess;  ///< sup_x (u - v)_+ per time
  double initial = 0.0;
  bool nonincreasing_vs_initial = true;
};

/// Track sup_x (u - v)_+ over the shared mesh and flag any time where it
/// exceeds the initial excess beyond tol.
CompareReport compare(const FieldSeries& u, const FieldSeries& v, double tol = 0.0);

}  // namespace pvs
