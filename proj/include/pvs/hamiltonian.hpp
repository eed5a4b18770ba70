#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pvs/expr.hpp"
#include "pvs/linalg.hpp"

namespace pvs {

/// Smooth scalar function of x with two derivatives, used for potentials,
/// growth coefficients and initial data.
class ScalarField {
 public:
  virtual ~ScalarField() = default;
  virtual int dim() const = 0;
  virtual double value(const VecN& x) const = 0;
  virtual VecN gradient(const VecN& x) const = 0;
  virtual MatN hessian(const VecN& x) const = 0;
};

using ScalarFieldPtr = std::shared_ptr<const ScalarField>;

ScalarFieldPtr zero_field(int n);
ScalarFieldPtr constant_field(int n, double c);
/// c + <b, x> + (1/2) <A x, x>
ScalarFieldPtr quadratic_field(int n, double c, const VecN& b, const MatN& A);
/// amp * sin(<k, x> + phase)
ScalarFieldPtr sinusoid_field(int n, double amp, const VecN& k, double phase);
/// Expression in variables x1..xn; derivatives are built symbolically.
ScalarFieldPtr expr_field(int n, const std::string& text);

/// One Hamiltonian component H(p, x) with the two derivative levels the
/// characteristic systems need. hess_px(a,b) = d^2 H / dp_a dx_b.
class Hamiltonian {
 public:
  virtual ~Hamiltonian() = default;
  virtual int dim() const = 0;
  virtual double value(const VecN& p, const VecN& x) const = 0;
  virtual VecN grad_p(const VecN& p, const VecN& x) const = 0;
  virtual VecN grad_x(const VecN& p, const VecN& x) const = 0;
  virtual MatN hess_pp(const VecN& p, const VecN& x) const = 0;
  virtual MatN hess_px(const VecN& p, const VecN& x) const = 0;
  virtual MatN hess_xx(const VecN& p, const VecN& x) const = 0;
  virtual bool x_independent() const { return false; }
  virtual std::string name() const = 0;
};

using HamiltonianPtr = std::shared_ptr<const Hamiltonian>;

/// H(p) independent of x, from an expression in p1..pn.
HamiltonianPtr x_independent_hamiltonian(int n, const std::string& expr_in_p);
/// (1/2)|p|^2
HamiltonianPtr kinetic_hamiltonian(int n);
/// (1/2)|p|^2 - f(x)
HamiltonianPtr separated_hamiltonian(ScalarFieldPtr f);
/// a(x) (|p|^2 + 1)^(1/2); a must stay positive on the working box.
HamiltonianPtr linear_growth_hamiltonian(ScalarFieldPtr a);
/// <g(x) p, p>^(q/2) with g(x) = c(x) G0, q >= 2. G0 symmetric positive
/// definite, c positive. Rejects q < 2 (the value is then not C^2 at p = 0).
HamiltonianPtr homogeneous_convex_hamiltonian(ScalarFieldPtr c, const MatN& G0, double q);
/// General H(p, x) from an expression in p1..pn, x1..xn.
HamiltonianPtr expr_hamiltonian(int n, const std::string& text);

/// A family H^1..H^m sharing one spatial dimension.
class HamiltonianSystem {
 public:
  HamiltonianSystem(std::vector<HamiltonianPtr> comps);
  int n() const { return n_; }
  int m() const { return static_cast<int>(comps_.size()); }
  const Hamiltonian& component(int i) const { return *comps_[static_cast<std::size_t>(i)]; }
  bool x_independent() const;

 private:
  std::vector<HamiltonianPtr> comps_;
  int n_;
};

/// Sampling region for derivative and bracket checks.
struct SampleBox {
  VecN p_lo, p_hi, x_lo, x_hi;
  int count = 200;
  std::uint64_t seed = 1;
};

/// {H^i, H^j}(p, x) = sum_k dH^i/dx_k dH^j/dp_k - dH^i/dp_k dH^j/dx_k.
double poisson_bracket(const Hamiltonian& hi, const Hamiltonian& hj, const VecN& p, const VecN& x);

struct CommutationReport {
  bool commutes = true;
  double max_defect = 0.0;
  VecN argmax_p, argmax_x;
};

/// Pairwise bracket magnitudes over deterministic samples in the box;
/// commutes iff the max stays within tol.
CommutationReport commutation_check(const HamiltonianSystem& sys, const SampleBox& box,
                                    double tol = 1e-8);

/// Max relative error between the analytic derivatives and central
/// differences over deterministic samples. Drives the consistency gate.
double hamiltonian_derivative_defect(const Hamiltonian& h, const SampleBox& box);

/// Fully nonlinear right-hand side F(X, p, r, x, t). Degenerate elliptic:
/// nondecreasing in X, nonincreasing in r.
struct FOperator {
  std::function<double(const MatN& X, const VecN& p, double r, const VecN& x, double t)> f;
  std::string name;

  double operator()(const MatN& X, const VecN& p, double r, const VecN& x, double t) const {
    return f(X, p, r, x, t);
  }
};

FOperator f_zero();
FOperator f_constant(double c);
/// kappa * trace(X): the heat operator when kappa = 1.
FOperator f_heat(double kappa = 1.0);

struct FValidationReport {
  double max_ellipticity_violation = 0.0;  // F(X+E) >= F(X) with E psd
  double max_r_violation = 0.0;            // F nonincreasing in r
  bool passed(double tol = 1e-9) const {
    return max_ellipticity_violation <= tol && max_r_violation <= tol;
  }
};

/// Samples random symmetric X, psd perturbations and r shifts.
FValidationReport validate_f_operator(const FOperator& f, int n, const SampleBox& box);

}  // namespace pvs
