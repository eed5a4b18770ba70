#pragma once

#include <cstddef>
#include <vector>

#include "pvs/characteristics.hpp"
#include "pvs/grid.hpp"
#include "pvs/hamiltonian.hpp"

namespace pvs {

struct LocalOperatorOptions {
  double theta_inv = 0.1;    // forward-map Jacobian determinant floor
  int newton_max_iter = 25;
  double newton_tol = 1e-11; // residual bound |X(x0) - y|_inf for the inverse map
  double pad = -1.0;         // seed box padding; negative requests the travel-bound estimate
  bool auto_mode = true;     // pick time_change for m = 1, rough_step otherwise
  FlowMode mode = FlowMode::rough_step;
  FlowOptions flow;
  Exec exec = Exec::parallel;
};

/// Forward characteristic data on the (padded) seed grid. Each seed x0
/// launches from momentum Dphi(x0) with the momentum Jacobian seeded by
/// D^2phi(x0), so det tracks the full derivative of x0 -> X(x0).
struct ForwardFields {
  GridSpec seeds;
  MultiField X;  // n components
  MultiField P;  // n components
  GridField Z;
  GridField det;
  double min_det = 1.0;
};

/// One output time of the local operator: the transported datum and its
/// first two derivative levels on the requested grid. The Hessian comes
/// from centered differences of dphi.
struct LocalSnapshot {
  double t0 = 0.0, t = 0.0;
  GridSpec grid;
  GridField phi;
  MultiField dphi;   // n components
  MultiField d2phi;  // n*n components, symmetric
  GridField det;     // forward-map determinant at the inverse image
  ForwardFields fwd;
  double max_newton_residual = 0.0;
  int max_newton_iters = 0;
};

/// Transport phi from t0 to t along the characteristic flow and pull the
/// result back through the inverse spatial map onto `out` nodes.
LocalSnapshot local_apply(const HamiltonianSystem& sys, const GeometricRoughPath& path,
                          const ScalarField& phi, double t0, double t, const GridSpec& out,
                          const LocalOperatorOptions& opts = {});

struct HorizonReport {
  double t0 = 0.0;
  double theta_inv = 0.0;
  double h_forward = 0.0;   // largest verified offset after t0
  double h_backward = 0.0;  // largest verified offset before t0
  double h = 0.0;           // verified radius: min over sides where the floor was crossed
  double min_det_at_h = 1.0;
  bool crossed_forward = false;
  bool crossed_backward = false;
};

/// Sweep the path's sample times away from t0 in both directions, advancing
/// every seed, until min det drops below the floor or the domain ends.
HorizonReport local_horizon(const HamiltonianSystem& sys, const GeometricRoughPath& path,
                            const ScalarField& phi, double t0, const GridSpec& seeds,
                            const LocalOperatorOptions& opts = {});

struct PropertyReport {
  double shift_defect = 0.0;                // ||S(phi1 + k) - (S phi1 + k)||_inf over times
  std::vector<double> comparison_defects;   // per time: (sup(S phi1 - S phi2) - sup(phi1 - phi2))+
  std::vector<double> semigroup_defects;    // per consecutive time pair
  double max_comparison() const;
  double max_semigroup() const;
};

/// Defects for the constant-shift, comparison and two-stage composition
/// identities of the operator, measured on `out` nodes at the given times
/// (all after t0, increasing).
PropertyReport check_properties(const HamiltonianSystem& sys, const GeometricRoughPath& path,
                                const ScalarField& phi1, const ScalarField& phi2, double k,
                                double t0, const std::vector<double>& times, const GridSpec& out,
                                const LocalOperatorOptions& opts = {});

/// Closed annulus r_in <= |x - center|_2 <= r_out.
struct AnnulusSpec {
  VecN center;
  double r_in = 0.0;
  double r_out = 0.0;
};

struct DependenceReport {
  double rho = 0.0;           // sampled travel bound over the window
  double sup_initial = 0.0;   // sup over K of phi1 - phi2
  double sup_evolved = 0.0;   // sup over the shrunken annulus of S phi1 - S phi2
  double sup_global = 0.0;    // sup over all out nodes of S phi1 - S phi2
  double defect = 0.0;        // (sup_evolved - sup_initial)+
  bool shrunken_empty = false;
};

/// Locality of the operator: values on the annulus shrunk by the travel
/// bound rho are controlled by the initial gap on the full annulus.
/// R bounds |Dphi| for both data.
DependenceReport domain_of_dependence_check(const HamiltonianSystem& sys,
                                            const GeometricRoughPath& path,
                                            const ScalarField& phi1, const ScalarField& phi2,
                                            double t0, double t, const AnnulusSpec& K, double R,
                                            const GridSpec& out,
                                            const LocalOperatorOptions& opts = {});

/// Datum backed by a snapshot's grid fields: multilinear value/gradient/
/// Hessian interpolation, so operator outputs can be fed back in.
ScalarFieldPtr snapshot_datum(const LocalSnapshot& snap);

/// Characteristic travel bound over the window, for gradients up to R.
/// local_apply widens this by two extra cells when it builds the seed grid.
double suggested_padding(const HamiltonianSystem& sys, const GeometricRoughPath& path, double t0,
                         double t, double R, const Box& xbox, const LocalOperatorOptions& opts);

}  // namespace pvs
