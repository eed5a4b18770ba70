#pragma once

#include <vector>

#include "pvs/exec.hpp"
#include "pvs/grid.hpp"
#include "pvs/hamiltonian.hpp"
#include "pvs/linalg.hpp"
#include "pvs/rough_path.hpp"

namespace pvs {

/// State transported along one characteristic: position, momentum, the
/// accumulated value integral, and the Jacobians of (X, P) with respect to
/// the initial position (including any p = Dphi(x) chain through jp's
/// initial value).
struct CharState {
  VecN x, p;
  double z = 0.0;
  MatN jx, jp;

  static CharState start(const VecN& x0, const VecN& p0) {
    CharState s;
    s.x = x0;
    s.p = p0;
    s.jx = MatN::identity(x0.n);
    s.jp = MatN(x0.n, x0.n);
    return s;
  }
  static CharState start(const VecN& x0, const VecN& p0, const MatN& jp0) {
    CharState s = start(x0, p0);
    s.jp = jp0;
    return s;
  }
};

/// Integration strategy.
///  - time_change: m = 1 reduction; the time-homogeneous system is run to
///    pseudo-time W(t) - W(t0) with a classical RK4 integrator.
///  - commuting: composition of per-component homogeneous flows, valid when
///    the pairwise Poisson brackets vanish.
///  - rough_step: one second-order step per path sample interval driven by
///    the increment and second-level block of that interval.
enum class FlowMode { time_change, commuting, rough_step };

const char* flow_mode_name(FlowMode m);

struct FlowOptions {
  double step = 1e-3;             // pseudo-time step for the RK4 modes
  double divergence_guard = 1e8;  // abort when |X| or |P| passes this
  bool carry_jacobians = true;    // disable to skip jx/jp transport (cheaper sweeps)
};

/// time_change when m = 1, rough_step otherwise.
FlowMode auto_flow_mode(const HamiltonianSystem& sys);

/// Incremental driver so sweeps over many output times do not restart the
/// integration. Either advance direction is allowed.
class FlowCursor {
 public:
  FlowCursor(const HamiltonianSystem& sys, const GeometricRoughPath& path, const CharState& init,
             double t0, FlowMode mode, const FlowOptions& opts);

  const CharState& state() const { return state_; }
  double time() const { return t_; }
  void advance(double t);

 private:
  void advance_time_change(double t);
  void advance_rough(double t);
  void recompute_commuting(double t);

  const HamiltonianSystem& sys_;
  const GeometricRoughPath& path_;
  CharState init_;
  CharState state_;
  double t0_;
  double t_;
  double tau_ = 0.0;  // time_change pseudo-time already integrated
  FlowMode mode_;
  FlowOptions opts_;
};

CharState flow(const HamiltonianSystem& sys, const GeometricRoughPath& path, const CharState& init,
               double t0, double t, FlowMode mode, const FlowOptions& opts = {});

/// States at the given times (each within the path's domain), computed
/// incrementally from t0.
std::vector<CharState> flow_trajectory(const HamiltonianSystem& sys,
                                       const GeometricRoughPath& path, const CharState& init,
                                       double t0, const std::vector<double>& times, FlowMode mode,
                                       const FlowOptions& opts = {});

/// Max-norm discrepancy between the time_change and rough_step outputs over
/// all state components. Requires m = 1.
double mode_equivalence_defect(const HamiltonianSystem& sys, const GeometricRoughPath& path,
                               const CharState& init, double t0, double t,
                               const FlowOptions& opts = {});

struct DeviationSpec {
  double radius = 1.0;  // momentum ball |p|_2 <= radius
  Box x_box;            // spatial sampling box (one center point if H is x-independent)
  int p_samples = 9;    // lattice points per axis in p
  int x_samples = 5;    // lattice points per axis in x
};

/// rho_R(sigma): sampled sup over |p| <= R, x in the box and |t - t0| <=
/// sigma of the travel distance |X(x,p,t) - x|.
double deviation_modulus(const HamiltonianSystem& sys, const GeometricRoughPath& path, double t0,
                         double sigma, const DeviationSpec& spec, FlowMode mode,
                         const FlowOptions& opts = {}, Exec exec = Exec::parallel);

/// Max over x, p, z, jx, jp of the componentwise gap. Used by the mode
/// equivalence and commuting-agreement checks.
double state_distance(const CharState& a, const CharState& b);

}  // namespace pvs
