#include "pvs/hamiltonian.hpp"

#include <cmath>

#include "pvs/errors.hpp"
#include "pvs/rng.hpp"

namespace pvs {

namespace {

class ZeroField final : public ScalarField {
 public:
  explicit ZeroField(int n) : n_(n) {}
  int dim() const override { return n_; }
  double value(const VecN&) const override { return 0.0; }
  VecN gradient(const VecN&) const override { return VecN(n_); }
  MatN hessian(const VecN&) const override { return MatN(n_, n_); }

 private:
  int n_;
};

class ConstantField final : public ScalarField {
 public:
  ConstantField(int n, double c) : n_(n), c_(c) {}
  int dim() const override { return n_; }
  double value(const VecN&) const override { return c_; }
  VecN gradient(const VecN&) const override { return VecN(n_); }
  MatN hessian(const VecN&) const override { return MatN(n_, n_); }

 private:
  int n_;
  double c_;
};

class QuadraticField final : public ScalarField {
 public:
  QuadraticField(int n, double c, const VecN& b, const MatN& A) : n_(n), c_(c), b_(b), A_(sym(A)) {}
  int dim() const override { return n_; }
  double value(const VecN& x) const override {
    return c_ + dot(b_, x) + 0.5 * dot(matvec(A_, x), x);
  }
  VecN gradient(const VecN& x) const override { return b_ + matvec(A_, x); }
  MatN hessian(const VecN&) const override { return A_; }

 private:
  int n_;
  double c_;
  VecN b_;
  MatN A_;
};

class SinusoidField final : public ScalarField {
 public:
  SinusoidField(int n, double amp, const VecN& k, double phase)
      : n_(n), amp_(amp), k_(k), phase_(phase) {}
  int dim() const override { return n_; }
  double value(const VecN& x) const override { return amp_ * std::sin(dot(k_, x) + phase_); }
  VecN gradient(const VecN& x) const override {
    return (amp_ * std::cos(dot(k_, x) + phase_)) * k_;
  }
  MatN hessian(const VecN& x) const override {
    return (-amp_ * std::sin(dot(k_, x) + phase_)) * outer(k_, k_);
  }

 private:
  int n_;
  double amp_;
  VecN k_;
  double phase_;
};

std::vector<std::string> x_var_names(int n) {
  std::vector<std::string> v;
  for (int i = 1; i <= n; ++i) v.push_back("x" + std::to_string(i));
  return v;
}

std::vector<std::string> px_var_names(int n) {
  std::vector<std::string> v;
  for (int i = 1; i <= n; ++i) v.push_back("p" + std::to_string(i));
  for (int i = 1; i <= n; ++i) v.push_back("x" + std::to_string(i));
  return v;
}

class ExprField final : public ScalarField {
 public:
  ExprField(int n, const std::string& text) : n_(n) {
    f_ = expr::Expression::parse(text, x_var_names(n));
    for (int i = 0; i < n; ++i) {
      g_[i] = f_.derivative(i);
      for (int j = 0; j < n; ++j) h_[i][j] = g_[i].derivative(j);
    }
  }
  int dim() const override { return n_; }
  double value(const VecN& x) const override { return f_.eval({x.a.data(), (std::size_t)n_}); }
  VecN gradient(const VecN& x) const override {
    VecN g(n_);
    for (int i = 0; i < n_; ++i) g[i] = g_[i].eval({x.a.data(), (std::size_t)n_});
    return g;
  }
  MatN hessian(const VecN& x) const override {
    MatN h(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) h(i, j) = h_[i][j].eval({x.a.data(), (std::size_t)n_});
    return h;
  }

 private:
  int n_;
  expr::Expression f_;
  expr::Expression g_[kMaxDim];
  expr::Expression h_[kMaxDim][kMaxDim];
};

}  // namespace

ScalarFieldPtr zero_field(int n) { return std::make_shared<ZeroField>(n); }
ScalarFieldPtr constant_field(int n, double c) { return std::make_shared<ConstantField>(n, c); }
ScalarFieldPtr quadratic_field(int n, double c, const VecN& b, const MatN& A) {
  return std::make_shared<QuadraticField>(n, c, b, A);
}
ScalarFieldPtr sinusoid_field(int n, double amp, const VecN& k, double phase) {
  return std::make_shared<SinusoidField>(n, amp, k, phase);
}
ScalarFieldPtr expr_field(int n, const std::string& text) {
  return std::make_shared<ExprField>(n, text);
}

namespace {

class KineticHamiltonian final : public Hamiltonian {
 public:
  explicit KineticHamiltonian(int n) : n_(n) {}
  int dim() const override { return n_; }
  double value(const VecN& p, const VecN&) const override { return 0.5 * dot(p, p); }
  VecN grad_p(const VecN& p, const VecN&) const override { return p; }
  VecN grad_x(const VecN&, const VecN&) const override { return VecN(n_); }
  MatN hess_pp(const VecN&, const VecN&) const override { return MatN::identity(n_); }
  MatN hess_px(const VecN&, const VecN&) const override { return MatN(n_, n_); }
  MatN hess_xx(const VecN&, const VecN&) const override { return MatN(n_, n_); }
  bool x_independent() const override { return true; }
  std::string name() const override { return "kinetic"; }

 private:
  int n_;
};

class SeparatedHamiltonian final : public Hamiltonian {
 public:
  explicit SeparatedHamiltonian(ScalarFieldPtr f) : f_(std::move(f)), n_(f_->dim()) {}
  int dim() const override { return n_; }
  double value(const VecN& p, const VecN& x) const override {
    return 0.5 * dot(p, p) - f_->value(x);
  }
  VecN grad_p(const VecN& p, const VecN&) const override { return p; }
  VecN grad_x(const VecN&, const VecN& x) const override { return -1.0 * f_->gradient(x); }
  MatN hess_pp(const VecN&, const VecN&) const override { return MatN::identity(n_); }
  MatN hess_px(const VecN&, const VecN&) const override { return MatN(n_, n_); }
  MatN hess_xx(const VecN&, const VecN& x) const override { return -1.0 * f_->hessian(x); }
  std::string name() const override { return "separated_potential"; }

 private:
  ScalarFieldPtr f_;
  int n_;
};

class LinearGrowthHamiltonian final : public Hamiltonian {
 public:
  explicit LinearGrowthHamiltonian(ScalarFieldPtr a) : a_(std::move(a)), n_(a_->dim()) {}
  int dim() const override { return n_; }
  double value(const VecN& p, const VecN& x) const override {
    return a_->value(x) * std::sqrt(dot(p, p) + 1.0);
  }
  VecN grad_p(const VecN& p, const VecN& x) const override {
    return (a_->value(x) / std::sqrt(dot(p, p) + 1.0)) * p;
  }
  VecN grad_x(const VecN& p, const VecN& x) const override {
    return std::sqrt(dot(p, p) + 1.0) * a_->gradient(x);
  }
  MatN hess_pp(const VecN& p, const VecN& x) const override {
    double s = std::sqrt(dot(p, p) + 1.0);
    MatN r = (a_->value(x) / s) * MatN::identity(n_);
    r += (-a_->value(x) / (s * s * s)) * outer(p, p);
    return r;
  }
  MatN hess_px(const VecN& p, const VecN& x) const override {
    double s = std::sqrt(dot(p, p) + 1.0);
    return outer((1.0 / s) * p, a_->gradient(x));
  }
  MatN hess_xx(const VecN& p, const VecN& x) const override {
    return std::sqrt(dot(p, p) + 1.0) * a_->hessian(x);
  }
  std::string name() const override { return "linear_growth"; }

 private:
  ScalarFieldPtr a_;
  int n_;
};

class HomogeneousConvexHamiltonian final : public Hamiltonian {
 public:
  HomogeneousConvexHamiltonian(ScalarFieldPtr c, const MatN& G0, double q)
      : c_(std::move(c)), g0_(sym(G0)), q_(q), n_(c_->dim()) {
    if (q_ < 2.0)
      throw ConfigError("homogeneous_convex: q must be >= 2 (value is not C^2 at p = 0 otherwise)");
    // Positive definiteness of the constant part, by leading minors.
    double d1 = g0_(0, 0);
    if (d1 <= 0.0 || (n_ >= 2 && det(g0_) <= 0.0))
      throw ConfigError("homogeneous_convex: constant matrix part must be positive definite");
  }
  int dim() const override { return n_; }

  double value(const VecN& p, const VecN& x) const override {
    double e = energy(p, x);
    return e <= 0.0 ? 0.0 : std::pow(e, 0.5 * q_);
  }
  VecN grad_p(const VecN& p, const VecN& x) const override {
    double e = energy(p, x);
    if (e <= 0.0) return VecN(n_);
    double s = 0.5 * q_;
    return (s * std::pow(e, s - 1.0) * 2.0 * c_->value(x)) * matvec(g0_, p);
  }
  VecN grad_x(const VecN& p, const VecN& x) const override {
    double e = energy(p, x);
    if (e <= 0.0) return VecN(n_);
    double s = 0.5 * q_;
    double q0 = dot(matvec(g0_, p), p);
    return (s * std::pow(e, s - 1.0) * q0) * c_->gradient(x);
  }
  MatN hess_pp(const VecN& p, const VecN& x) const override {
    double e = energy(p, x);
    double s = 0.5 * q_;
    if (e <= 0.0) {
      if (q_ == 2.0) return (2.0 * c_->value(x)) * g0_;
      return MatN(n_, n_);
    }
    VecN ep = (2.0 * c_->value(x)) * matvec(g0_, p);
    MatN r = (s * (s - 1.0) * std::pow(e, s - 2.0)) * outer(ep, ep);
    r += (s * std::pow(e, s - 1.0) * 2.0 * c_->value(x)) * g0_;
    return r;
  }
  MatN hess_px(const VecN& p, const VecN& x) const override {
    double e = energy(p, x);
    if (e <= 0.0) return MatN(n_, n_);
    double s = 0.5 * q_;
    double q0 = dot(matvec(g0_, p), p);
    VecN ep = (2.0 * c_->value(x)) * matvec(g0_, p);
    VecN ex = q0 * c_->gradient(x);
    MatN r = (s * (s - 1.0) * std::pow(e, s - 2.0)) * outer(ep, ex);
    r += (s * std::pow(e, s - 1.0) * 2.0) * outer(matvec(g0_, p), c_->gradient(x));
    return r;
  }
  MatN hess_xx(const VecN& p, const VecN& x) const override {
    double e = energy(p, x);
    if (e <= 0.0) return MatN(n_, n_);
    double s = 0.5 * q_;
    double q0 = dot(matvec(g0_, p), p);
    VecN ex = q0 * c_->gradient(x);
    MatN r = (s * (s - 1.0) * std::pow(e, s - 2.0)) * outer(ex, ex);
    r += (s * std::pow(e, s - 1.0) * q0) * c_->hessian(x);
    return r;
  }
  std::string name() const override { return "homogeneous_convex"; }

 private:
  double energy(const VecN& p, const VecN& x) const {
    return c_->value(x) * dot(matvec(g0_, p), p);
  }

  ScalarFieldPtr c_;
  MatN g0_;
  double q_;
  int n_;
};

/// Symbolic Hamiltonian in the variables p1..pn, x1..xn (or p-only for the
/// x-independent family). All derivative trees are built at construction.
class ExprHamiltonian final : public Hamiltonian {
 public:
  ExprHamiltonian(int n, const std::string& text, bool p_only) : n_(n), p_only_(p_only) {
    auto vars = p_only ? [&] {
      std::vector<std::string> v;
      for (int i = 1; i <= n; ++i) v.push_back("p" + std::to_string(i));
      return v;
    }() : px_var_names(n);
    h_ = expr::Expression::parse(text, vars);
    int nv = p_only ? n : 2 * n;
    for (int i = 0; i < nv; ++i) {
      d1_[i] = h_.derivative(i);
      for (int j = 0; j < nv; ++j) d2_[i][j] = d1_[i].derivative(j);
    }
  }
  int dim() const override { return n_; }
  double value(const VecN& p, const VecN& x) const override {
    Buf b;
    return h_.eval(pack(b, p, x));
  }
  VecN grad_p(const VecN& p, const VecN& x) const override {
    Buf b;
    auto v = pack(b, p, x);
    VecN g(n_);
    for (int i = 0; i < n_; ++i) g[i] = d1_[i].eval(v);
    return g;
  }
  VecN grad_x(const VecN& p, const VecN& x) const override {
    VecN g(n_);
    if (p_only_) return g;
    Buf b;
    auto v = pack(b, p, x);
    for (int i = 0; i < n_; ++i) g[i] = d1_[n_ + i].eval(v);
    return g;
  }
  MatN hess_pp(const VecN& p, const VecN& x) const override {
    Buf b;
    auto v = pack(b, p, x);
    MatN h(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) h(i, j) = d2_[i][j].eval(v);
    return h;
  }
  MatN hess_px(const VecN& p, const VecN& x) const override {
    MatN h(n_, n_);
    if (p_only_) return h;
    Buf b;
    auto v = pack(b, p, x);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) h(i, j) = d2_[i][n_ + j].eval(v);
    return h;
  }
  MatN hess_xx(const VecN& p, const VecN& x) const override {
    MatN h(n_, n_);
    if (p_only_) return h;
    Buf b;
    auto v = pack(b, p, x);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) h(i, j) = d2_[n_ + i][n_ + j].eval(v);
    return h;
  }
  bool x_independent() const override { return p_only_; }
  std::string name() const override { return p_only_ ? "x_independent" : "expr"; }

 private:
  using Buf = std::array<double, 2 * kMaxDim>;

  std::span<const double> pack(Buf& b, const VecN& p, const VecN& x) const {
    for (int i = 0; i < n_; ++i) b[i] = p[i];
    if (!p_only_)
      for (int i = 0; i < n_; ++i) b[n_ + i] = x[i];
    return {b.data(), static_cast<std::size_t>(p_only_ ? n_ : 2 * n_)};
  }

  int n_;
  bool p_only_;
  expr::Expression h_;
  expr::Expression d1_[2 * kMaxDim];
  expr::Expression d2_[2 * kMaxDim][2 * kMaxDim];
};

}  // namespace

HamiltonianPtr x_independent_hamiltonian(int n, const std::string& expr_in_p) {
  return std::make_shared<ExprHamiltonian>(n, expr_in_p, true);
}
HamiltonianPtr kinetic_hamiltonian(int n) { return std::make_shared<KineticHamiltonian>(n); }
HamiltonianPtr separated_hamiltonian(ScalarFieldPtr f) {
  return std::make_shared<SeparatedHamiltonian>(std::move(f));
}
HamiltonianPtr linear_growth_hamiltonian(ScalarFieldPtr a) {
  return std::make_shared<LinearGrowthHamiltonian>(std::move(a));
}
HamiltonianPtr homogeneous_convex_hamiltonian(ScalarFieldPtr c, const MatN& G0, double q) {
  return std::make_shared<HomogeneousConvexHamiltonian>(std::move(c), G0, q);
}
HamiltonianPtr expr_hamiltonian(int n, const std::string& text) {
  return std::make_shared<ExprHamiltonian>(n, text, false);
}

HamiltonianSystem::HamiltonianSystem(std::vector<HamiltonianPtr> comps) : comps_(std::move(comps)) {
  if (comps_.empty()) throw ConfigError("hamiltonian system: needs at least one component");
  if (static_cast<int>(comps_.size()) > kMaxDim)
    throw ConfigError("hamiltonian system: too many components for the desk-scale cap");
  n_ = comps_[0]->dim();
  for (const auto& c : comps_)
    if (c->dim() != n_) throw ConfigError("hamiltonian system: mixed spatial dimensions");
}

bool HamiltonianSystem::x_independent() const {
  for (const auto& c : comps_)
    if (!c->x_independent()) return false;
  return true;
}

double poisson_bracket(const Hamiltonian& hi, const Hamiltonian& hj, const VecN& p, const VecN& x) {
  VecN hix = hi.grad_x(p, x), hip = hi.grad_p(p, x);
  VecN hjx = hj.grad_x(p, x), hjp = hj.grad_p(p, x);
  return dot(hix, hjp) - dot(hip, hjx);
}

namespace {

double unit_uniform(std::uint64_t& state) {
  state = mix64(state);
  return static_cast<double>(state >> 11) * 0x1.0p-53;
}

void sample_px(const SampleBox& box, std::uint64_t& state, VecN& p, VecN& x) {
  int n = box.p_lo.n;
  p = VecN(n);
  x = VecN(n);
  for (int d = 0; d < n; ++d)
    p[d] = box.p_lo[d] + (box.p_hi[d] - box.p_lo[d]) * unit_uniform(state);
  for (int d = 0; d < n; ++d)
    x[d] = box.x_lo[d] + (box.x_hi[d] - box.x_lo[d]) * unit_uniform(state);
}

}  // namespace

CommutationReport commutation_check(const HamiltonianSystem& sys, const SampleBox& box, double tol) {
  CommutationReport rep;
  rep.argmax_p = VecN(sys.n());
  rep.argmax_x = VecN(sys.n());
  std::uint64_t state = mix64(box.seed ^ 0xc0117a7e5ull);
  for (int k = 0; k < box.count; ++k) {
    VecN p, x;
    sample_px(box, state, p, x);
    for (int i = 0; i < sys.m(); ++i)
      for (int j = i + 1; j < sys.m(); ++j) {
        double b = std::fabs(poisson_bracket(sys.component(i), sys.component(j), p, x));
        if (b > rep.max_defect) {
          rep.max_defect = b;
          rep.argmax_p = p;
          rep.argmax_x = x;
        }
      }
  }
  rep.commutes = rep.max_defect <= tol;
  return rep;
}

double hamiltonian_derivative_defect(const Hamiltonian& h, const SampleBox& box) {
  const int n = h.dim();
  std::uint64_t state = mix64(box.seed ^ 0xde51f7ull);
  double worst = 0.0;
  auto upd = [&](double analytic, double fd) {
    double err = std::fabs(analytic - fd) / (1.0 + std::fabs(analytic));
    if (err > worst) worst = err;
  };
  for (int k = 0; k < box.count; ++k) {
    VecN p, x;
    sample_px(box, state, p, x);
    VecN gp = h.grad_p(p, x), gx = h.grad_x(p, x);
    MatN hpp = h.hess_pp(p, x), hpx = h.hess_px(p, x), hxx = h.hess_xx(p, x);
    for (int d = 0; d < n; ++d) {
      double step = 1e-5 * (1.0 + std::fabs(p[d]));
      VecN pp = p, pm = p;
      pp[d] += step;
      pm[d] -= step;
      upd(gp[d], (h.value(pp, x) - h.value(pm, x)) / (2.0 * step));
      VecN gpp = h.grad_p(pp, x), gpm = h.grad_p(pm, x);
      for (int a = 0; a < n; ++a) upd(hpp(a, d), (gpp[a] - gpm[a]) / (2.0 * step));

      step = 1e-5 * (1.0 + std::fabs(x[d]));
      VecN xp = x, xm = x;
      xp[d] += step;
      xm[d] -= step;
      upd(gx[d], (h.value(p, xp) - h.value(p, xm)) / (2.0 * step));
      VecN gpxp = h.grad_p(p, xp), gpxm = h.grad_p(p, xm);
      for (int a = 0; a < n; ++a) upd(hpx(a, d), (gpxp[a] - gpxm[a]) / (2.0 * step));
      VecN gxxp = h.grad_x(p, xp), gxxm = h.grad_x(p, xm);
      for (int a = 0; a < n; ++a) upd(hxx(a, d), (gxxp[a] - gxxm[a]) / (2.0 * step));
    }
  }
  return worst;
}

FOperator f_zero() {
  return FOperator{[](const MatN&, const VecN&, double, const VecN&, double) { return 0.0; },
                   "zero"};
}

FOperator f_constant(double c) {
  return FOperator{[c](const MatN&, const VecN&, double, const VecN&, double) { return c; },
                   "constant"};
}

FOperator f_heat(double kappa) {
  return FOperator{
      [kappa](const MatN& X, const VecN&, double, const VecN&, double) { return kappa * trace(X); },
      "heat"};
}

FValidationReport validate_f_operator(const FOperator& f, int n, const SampleBox& box) {
  FValidationReport rep;
  std::uint64_t state = mix64(box.seed ^ 0xf0b5ull);
  for (int k = 0; k < box.count; ++k) {
    VecN p, x;
    sample_px(box, state, p, x);
    double t = unit_uniform(state);
    double r = 4.0 * unit_uniform(state) - 2.0;
    MatN X(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        X(i, j) = 4.0 * unit_uniform(state) - 2.0;
        X(j, i) = X(i, j);
      }
    MatN B(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) B(i, j) = 2.0 * unit_uniform(state) - 1.0;
    MatN E = matmul(B, transpose(B));
    double base = f(X, p, r, x, t);
    double bumped = f(X + E, p, r, x, t);
    rep.max_ellipticity_violation = std::max(rep.max_ellipticity_violation, base - bumped);
    double dr = 2.0 * unit_uniform(state) + 1e-3;
    double shifted = f(X, p, r + dr, x, t);
    rep.max_r_violation = std::max(rep.max_r_violation, shifted - base);
  }
  return rep;
}

}  // namespace pvs
