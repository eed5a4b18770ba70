#include "pvs/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pvs/errors.hpp"

namespace pvs {

const char* flow_mode_name(FlowMode m) {
  switch (m) {
    case FlowMode::time_change: return "time_change";
    case FlowMode::commuting: return "commuting";
    case FlowMode::rough_step: return "rough_step";
  }
  return "?";
}

FlowMode auto_flow_mode(const HamiltonianSystem& sys) {
  return sys.m() == 1 ? FlowMode::time_change : FlowMode::rough_step;
}

namespace {

struct Deriv {
  VecN dx, dp;
  double dz = 0.0;
  MatN djx, djp;
};

// Right-hand side of the time-homogeneous characteristic system for one
// component, including the variational (Jacobian) blocks when requested.
Deriv homogeneous_rhs(const Hamiltonian& h, const CharState& s, bool jac) {
  Deriv d;
  VecN hp = h.grad_p(s.p, s.x);
  VecN hx = h.grad_x(s.p, s.x);
  d.dx = -1.0 * hp;
  d.dp = hx;
  d.dz = h.value(s.p, s.x) - dot(s.p, hp);
  if (jac) {
    MatN hpp = h.hess_pp(s.p, s.x);
    MatN hpx = h.hess_px(s.p, s.x);
    MatN hxx = h.hess_xx(s.p, s.x);
    d.djx = -1.0 * (matmul(hpp, s.jp) + matmul(hpx, s.jx));
    d.djp = matmul(transpose(hpx), s.jp) + matmul(hxx, s.jx);
  } else {
    d.djx = MatN(s.x.n, s.x.n);
    d.djp = MatN(s.x.n, s.x.n);
  }
  return d;
}

CharState axpy(const CharState& s, double c, const Deriv& d) {
  CharState r = s;
  r.x += c * d.dx;
  r.p += c * d.dp;
  r.z += c * d.dz;
  r.jx += c * d.djx;
  r.jp += c * d.djp;
  return r;
}

void guard(const CharState& s, double limit, double t) {
  if (!(norm_inf(s.x) <= limit) || !(norm_inf(s.p) <= limit) || !(std::fabs(s.z) <= limit))
    throw FlowDivergenceError("characteristic flow diverged near t = " + std::to_string(t));
}

// Classical RK4 in pseudo-time from 0 to tau (either sign) under one
// component's homogeneous system.
void rk4_leg(const Hamiltonian& h, CharState& s, double tau, const FlowOptions& opts,
             double t_report) {
  if (tau == 0.0) return;
  int steps = static_cast<int>(std::ceil(std::fabs(tau) / opts.step));
  if (steps < 1) steps = 1;
  double dt = tau / steps;
  const bool jac = opts.carry_jacobians;
  for (int k = 0; k < steps; ++k) {
    Deriv k1 = homogeneous_rhs(h, s, jac);
    Deriv k2 = homogeneous_rhs(h, axpy(s, 0.5 * dt, k1), jac);
    Deriv k3 = homogeneous_rhs(h, axpy(s, 0.5 * dt, k2), jac);
    Deriv k4 = homogeneous_rhs(h, axpy(s, dt, k3), jac);
    CharState next = s;
    double c = dt / 6.0;
    next.x += c * (k1.dx + k4.dx) + (2.0 * c) * (k2.dx + k3.dx);
    next.p += c * (k1.dp + k4.dp) + (2.0 * c) * (k2.dp + k3.dp);
    next.z += c * (k1.dz + k4.dz) + (2.0 * c) * (k2.dz + k3.dz);
    if (jac) {
      next.jx += c * (k1.djx + k4.djx) + (2.0 * c) * (k2.djx + k3.djx);
      next.jp += c * (k1.djp + k4.djp) + (2.0 * c) * (k2.djp + k3.djp);
    }
    s = next;
    guard(s, opts.divergence_guard, t_report);
  }
}

struct ComponentEval {
  double h;
  VecN hp, hx;
  MatN hpp, hpx, hxx;
};

// One second-order step over a sample interval, driven by (dw, ww): the
// increment term plus the first-derivative correction contracted against the
// second level. The Jacobian blocks, when carried, are updated by directional
// central differences of the same (x, p) step map, so they are the derivative
// of the discrete scheme itself.
void davie_step(const HamiltonianSystem& sys, CharState& s, const VecN& dw, const MatN& ww,
                const FlowOptions& opts, double t_report) {
  const int n = sys.n();
  const int m = sys.m();

  auto eval_all = [&](const VecN& p0, const VecN& x0, ComponentEval* ev) {
    for (int i = 0; i < m; ++i) {
      const Hamiltonian& h = sys.component(i);
      ev[i].h = h.value(p0, x0);
      ev[i].hp = h.grad_p(p0, x0);
      ev[i].hx = h.grad_x(p0, x0);
      ev[i].hpp = h.hess_pp(p0, x0);
      ev[i].hpx = h.hess_px(p0, x0);
      ev[i].hxx = h.hess_xx(p0, x0);
    }
  };

  auto step_from = [&](const VecN& x0, const VecN& p0, const ComponentEval* ev, VecN& x1,
                       VecN& p1) {
    x1 = x0;
    p1 = p0;
    for (int i = 0; i < m; ++i) {
      x1 += (-dw[i]) * ev[i].hp;
      p1 += dw[i] * ev[i].hx;
    }
    for (int i = 0; i < m; ++i) {
      VecN vx = -1.0 * ev[i].hp;
      VecN vp = ev[i].hx;
      for (int j = 0; j < m; ++j) {
        VecN cx = -1.0 * (matvec(ev[j].hpx, vx) + matvec(ev[j].hpp, vp));
        VecN cp = matvec(ev[j].hxx, vx) + matvec(transpose(ev[j].hpx), vp);
        x1 += ww(i, j) * cx;
        p1 += ww(i, j) * cp;
      }
    }
  };

  ComponentEval ev[kMaxDim];
  eval_all(s.p, s.x, ev);

  MatN jx_new, jp_new;
  if (opts.carry_jacobians) {
    jx_new = MatN(n, n);
    jp_new = MatN(n, n);
    double scale_y = 1.0 + std::max(norm_inf(s.x), norm_inf(s.p));
    for (int c = 0; c < n; ++c) {
      double colmax = 0.0;
      for (int a = 0; a < n; ++a)
        colmax = std::max({colmax, std::fabs(s.jx(a, c)), std::fabs(s.jp(a, c))});
      if (colmax == 0.0) continue;
      double eps = 1e-5 * scale_y;
      VecN xp(n), pp(n), xm(n), pm(n);
      for (int a = 0; a < n; ++a) {
        double ux = s.jx(a, c) / colmax, up = s.jp(a, c) / colmax;
        xp[a] = s.x[a] + eps * ux;
        xm[a] = s.x[a] - eps * ux;
        pp[a] = s.p[a] + eps * up;
        pm[a] = s.p[a] - eps * up;
      }
      ComponentEval evd[kMaxDim];
      VecN xfp, pfp, xfm, pfm;
      eval_all(pp, xp, evd);
      step_from(xp, pp, evd, xfp, pfp);
      eval_all(pm, xm, evd);
      step_from(xm, pm, evd, xfm, pfm);
      for (int a = 0; a < n; ++a) {
        jx_new(a, c) = colmax * (xfp[a] - xfm[a]) / (2.0 * eps);
        jp_new(a, c) = colmax * (pfp[a] - pfm[a]) / (2.0 * eps);
      }
    }
  }

  // Value integral: increment term plus the second-level correction with the
  // integrand G_j = H^j - p . D_pH^j differentiated along the driving fields.
  for (int i = 0; i < m; ++i) s.z += dw[i] * (ev[i].h - dot(s.p, ev[i].hp));
  for (int i = 0; i < m; ++i) {
    VecN vx = -1.0 * ev[i].hp;
    VecN vp = ev[i].hx;
    for (int j = 0; j < m; ++j) {
      VecN gx = ev[j].hx - matvec(transpose(ev[j].hpx), s.p);
      VecN gp = -1.0 * matvec(ev[j].hpp, s.p);
      s.z += ww(i, j) * (dot(gx, vx) + dot(gp, vp));
    }
  }

  VecN x_new, p_new;
  step_from(s.x, s.p, ev, x_new, p_new);
  s.x = x_new;
  s.p = p_new;
  if (opts.carry_jacobians) {
    s.jx = jx_new;
    s.jp = jp_new;
  }
  guard(s, opts.divergence_guard, t_report);
}

std::vector<double> breakpoints(const GeometricRoughPath& path, double a, double b) {
  std::vector<double> pts;
  pts.push_back(a);
  const auto& times = path.sample_times();
  if (a < b) {
    for (double t : times)
      if (t > a && t < b) pts.push_back(t);
  } else {
    for (auto it = times.rbegin(); it != times.rend(); ++it)
      if (*it < a && *it > b) pts.push_back(*it);
  }
  pts.push_back(b);
  return pts;
}

}  // namespace

FlowCursor::FlowCursor(const HamiltonianSystem& sys, const GeometricRoughPath& path,
                       const CharState& init, double t0, FlowMode mode, const FlowOptions& opts)
    : sys_(sys), path_(path), init_(init), state_(init), t0_(t0), t_(t0), mode_(mode), opts_(opts) {
  if (sys.n() != init.x.n || sys.n() != init.p.n)
    throw ConfigError("flow: initial state dimension does not match the system");
  if (mode == FlowMode::time_change && sys.m() != 1)
    throw ConfigError("flow: time_change mode requires a single driving component");
  if (t0 < path.t_begin() - 1e-12 || t0 > path.t_end() + 1e-12)
    throw ConfigError("flow: anchor time outside the path domain");
}

void FlowCursor::advance(double t) {
  if (t < path_.t_begin() - 1e-12 || t > path_.t_end() + 1e-12)
    throw ConfigError("flow: target time outside the path domain");
  switch (mode_) {
    case FlowMode::time_change: advance_time_change(t); break;
    case FlowMode::rough_step: advance_rough(t); break;
    case FlowMode::commuting: recompute_commuting(t); break;
  }
  t_ = t;
}

void FlowCursor::advance_time_change(double t) {
  double tau_new = path_.value(t)[0] - path_.value(t0_)[0];
  rk4_leg(sys_.component(0), state_, tau_new - tau_, opts_, t);
  tau_ = tau_new;
}

void FlowCursor::advance_rough(double t) {
  if (t == t_) return;
  auto pts = breakpoints(path_, t_, t);
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    VecN dw = path_.increment(pts[k], pts[k + 1]);
    MatN ww = path_.second_level(pts[k], pts[k + 1]);
    davie_step(sys_, state_, dw, ww, opts_, pts[k + 1]);
  }
}

void FlowCursor::recompute_commuting(double t) {
  state_ = init_;
  for (int i = 0; i < sys_.m(); ++i) {
    double tau = path_.value(t)[i] - path_.value(t0_)[i];
    rk4_leg(sys_.component(i), state_, tau, opts_, t);
  }
}

CharState flow(const HamiltonianSystem& sys, const GeometricRoughPath& path, const CharState& init,
               double t0, double t, FlowMode mode, const FlowOptions& opts) {
  FlowCursor cur(sys, path, init, t0, mode, opts);
  cur.advance(t);
  return cur.state();
}

std::vector<CharState> flow_trajectory(const HamiltonianSystem& sys,
                                       const GeometricRoughPath& path, const CharState& init,
                                       double t0, const std::vector<double>& times, FlowMode mode,
                                       const FlowOptions& opts) {
  FlowCursor cur(sys, path, init, t0, mode, opts);
  std::vector<CharState> out;
  out.reserve(times.size());
  for (double t : times) {
    cur.advance(t);
    out.push_back(cur.state());
  }
  return out;
}

double state_distance(const CharState& a, const CharState& b) {
  double d = std::fabs(a.z - b.z);
  d = std::max(d, norm_inf(a.x - b.x));
  d = std::max(d, norm_inf(a.p - b.p));
  d = std::max(d, norm_max(a.jx - b.jx));
  d = std::max(d, norm_max(a.jp - b.jp));
  return d;
}

double mode_equivalence_defect(const HamiltonianSystem& sys, const GeometricRoughPath& path,
                               const CharState& init, double t0, double t,
                               const FlowOptions& opts) {
  if (sys.m() != 1) throw ConfigError("mode_equivalence_defect: requires m = 1");
  CharState a = flow(sys, path, init, t0, t, FlowMode::time_change, opts);
  CharState b = flow(sys, path, init, t0, t, FlowMode::rough_step, opts);
  return state_distance(a, b);
}

double deviation_modulus(const HamiltonianSystem& sys, const GeometricRoughPath& path, double t0,
                         double sigma, const DeviationSpec& spec, FlowMode mode,
                         const FlowOptions& opts, Exec exec) {
  if (sigma < 0.0) throw ConfigError("deviation_modulus: sigma must be nonnegative");
  if (sigma == 0.0) return 0.0;
  const int n = sys.n();

  // Momentum lattice on [-R, R]^n, projected onto the Euclidean ball.
  std::vector<VecN> ps;
  int pk = std::max(2, spec.p_samples);
  std::array<int, kMaxDim> idx{};
  for (;;) {
    VecN p(n);
    for (int d = 0; d < n; ++d) p[d] = -spec.radius + 2.0 * spec.radius * idx[d] / (pk - 1);
    double r = norm2(p);
    if (r > spec.radius && r > 0.0) p = (spec.radius / r) * p;
    ps.push_back(p);
    int d = 0;
    while (d < n && ++idx[d] == pk) idx[d++] = 0;
    if (d == n) break;
  }

  std::vector<VecN> xs;
  if (sys.x_independent()) {
    VecN c(n);
    for (int d = 0; d < n; ++d) c[d] = 0.5 * (spec.x_box.lo[d] + spec.x_box.hi[d]);
    xs.push_back(c);
  } else {
    int xk = std::max(2, spec.x_samples);
    idx = {};
    for (;;) {
      VecN x(n);
      for (int d = 0; d < n; ++d)
        x[d] = spec.x_box.lo[d] + (spec.x_box.hi[d] - spec.x_box.lo[d]) * idx[d] / (xk - 1);
      xs.push_back(x);
      int d = 0;
      while (d < n && ++idx[d] == xk) idx[d++] = 0;
      if (d == n) break;
    }
  }

  double lo = std::max(path.t_begin(), t0 - sigma);
  double hi = std::min(path.t_end(), t0 + sigma);
  std::vector<double> fwd{t0}, bwd{t0};
  for (double t : path.sample_times()) {
    if (t > t0 && t < hi) fwd.push_back(t);
    if (t < t0 && t > lo) bwd.push_back(t);
  }
  if (hi > t0) fwd.push_back(hi);
  std::sort(bwd.begin(), bwd.end(), std::greater<>());
  if (lo < t0) bwd.push_back(lo);

  FlowOptions sweep_opts = opts;
  sweep_opts.carry_jacobians = false;

  const std::size_t total = ps.size() * xs.size();
  return parallel_max(total, exec, [&](std::size_t q) {
    const VecN& p = ps[q / xs.size()];
    const VecN& x = xs[q % xs.size()];
    double best = 0.0;
    for (const auto* dir : {&fwd, &bwd}) {
      if (dir->size() < 2) continue;
      FlowCursor cur(sys, path, CharState::start(x, p), t0, mode, sweep_opts);
      for (double t : *dir) {
        cur.advance(t);
        best = std::max(best, norm2(cur.state().x - x));
      }
    }
    return best;
  });
}

}  // namespace pvs
