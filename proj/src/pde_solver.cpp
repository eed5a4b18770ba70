#include "pvs/pde_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "pvs/errors.hpp"
#include "pvs/rng.hpp"

namespace pvs {

namespace {

std::size_t find_frame(const std::vector<double>& times, double t, const char* who) {
  for (std::size_t i = 0; i < times.size(); ++i)
    if (std::fabs(times[i] - t) <= 1e-9) return i;
  char buf[120];
  std::snprintf(buf, sizeof buf, "%s: no frame was emitted at t = %.9g", who, t);
  throw ConfigError(buf);
}

// L[i][a] >= sup |dH^i/dp_a| over the grid box and |p|_inf <= P, sampled on
// a coarse lattice and inflated by 10 percent.
std::array<std::array<double, kMaxDim>, kMaxDim> dissipation_bounds(
    const HamiltonianSystem& sys, const GridSpec& g, double P) {
  const int n = g.dim, m = sys.m();
  std::array<std::array<double, kMaxDim>, kMaxDim> L{};
  const std::size_t stride = std::max<std::size_t>(1, g.size() / 2048);
  const double lev[5] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  for (std::size_t node = 0; node < g.size(); node += stride) {
    VecN x = g.coord(node);
    std::array<int, kMaxDim> ip{};
    for (;;) {
      VecN p(n);
      for (int d = 0; d < n; ++d) p[d] = P * lev[ip[d]];
      for (int i = 0; i < m; ++i) {
        VecN hp = sys.component(i).grad_p(p, x);
        for (int a = 0; a < n; ++a) L[i][a] = std::max(L[i][a], std::fabs(hp[a]));
      }
      int d = 0;
      while (d < n && ++ip[d] == 5) ip[d++] = 0;
      if (d == n) break;
    }
  }
  for (int i = 0; i < m; ++i)
    for (int a = 0; a < n; ++a) L[i][a] *= 1.1;
  return L;
}

// One monotone Lax-Friedrichs chunk for the path increment dw:
//   out = u + sum_i dw_i H^i(Dbar u, x) + sum_a (nu_a / 2) D2_a u
// with nu_a = sum_i |dw_i| L[i][a] / dx. The caller keeps sum_a nu_a <= 0.9.
// grad_scratch receives |Dbar u|_inf per node for the gradient-cap check.
void lf_chunk(const HamiltonianSystem& sys, const GridField& u, GridField& out, const VecN& dw,
              const std::array<std::array<double, kMaxDim>, kMaxDim>& L,
              std::vector<double>& grad_scratch, Exec exec) {
  const GridSpec& g = u.spec;
  const int n = g.dim, m = sys.m();
  double nu[kMaxDim] = {0.0, 0.0, 0.0};
  for (int a = 0; a < n; ++a) {
    for (int i = 0; i < m; ++i) nu[a] += std::fabs(dw[i]) * L[i][a];
    nu[a] /= g.dx;
  }
  parallel_for(g.size(), exec, [&](std::size_t j) {
    auto idx = g.unflat(j);
    VecN x = g.coord(j);
    VecN pavg(n);
    double diss = 0.0, pmax = 0.0;
    for (int a = 0; a < n; ++a) {
      auto ipl = idx, imn = idx;
      if (idx[a] + 1 < g.shape[a]) ipl[a] = idx[a] + 1;
      if (idx[a] > 0) imn[a] = idx[a] - 1;
      double up = u[g.flat(ipl)], um = u[g.flat(imn)];
      pavg[a] = (up - um) / (2.0 * g.dx);
      diss += 0.5 * nu[a] * (up - 2.0 * u[j] + um);
      pmax = std::max(pmax, std::fabs(pavg[a]));
    }
    double hsum = 0.0;
    for (int i = 0; i < m; ++i)
      if (dw[i] != 0.0) hsum += dw[i] * sys.component(i).value(pavg, x);
    out[j] = u[j] + hsum + diss;
    grad_scratch[j] = pmax;
  });
}

// Explicit Euler step for F with central D2u and Bellman-upwinded Du: each
// gradient slot takes the one-sided difference whose sign sense keeps the
// update monotone, probed from F itself.
void f_step(const FOperator& F, const GridField& u, GridField& out, double dt, double t,
            Exec exec) {
  const GridSpec& g = u.spec;
  const int n = g.dim;
  parallel_for(g.size(), exec, [&](std::size_t j) {
    auto idx = g.unflat(j);
    VecN x = g.coord(j);
    MatN X = node_hessian(u, j);
    VecN pc = node_gradient(u, j);
    double r = u[j];
    VecN pup = pc;
    const double eps = 1e-6 * (1.0 + norm_inf(pc));
    for (int a = 0; a < n; ++a) {
      VecN pp = pc, pm = pc;
      pp[a] += eps;
      pm[a] -= eps;
      double s = F(X, pp, r, x, t) - F(X, pm, r, x, t);
      if (s > 1e-14 || s < -1e-14) {
        auto ipl = idx, imn = idx;
        if (idx[a] + 1 < g.shape[a]) ipl[a] = idx[a] + 1;
        if (idx[a] > 0) imn[a] = idx[a] - 1;
        pup[a] = s > 0.0 ? (u[g.flat(ipl)] - u[j]) / g.dx : (u[j] - u[g.flat(imn)]) / g.dx;
      }
    }
    out[j] = u[j] + dt * F(X, pup, r, x, t);
  });
}

SolveReport march(const PDEProblem& prob, const GeometricRoughPath& path,
                  std::vector<double> outs, Exec exec) {
  const GridSpec& g = prob.grid;
  const int n = g.dim, m = prob.sys.m();
  if (!prob.u0) throw ConfigError("pde solve: missing initial datum");
  if (g.dim != prob.sys.n()) throw ConfigError("pde solve: grid dimension does not match the system");
  if (prob.u0->dim() != n) throw ConfigError("pde solve: datum dimension mismatch");
  if (!(prob.T > 0.0) || !(prob.dt > 0.0)) throw ConfigError("pde solve: need a positive horizon and step");
  if (path.t_begin() > 1e-12 || path.t_end() < prob.T - 1e-12)
    throw ConfigError("pde solve: the path does not cover [0, T]");
  if (outs.empty()) outs.push_back(prob.T);
  std::sort(outs.begin(), outs.end());
  outs.erase(std::unique(outs.begin(), outs.end(),
                         [](double a, double b) { return std::fabs(a - b) < 1e-12; }),
             outs.end());
  for (double s : outs)
    if (s < -1e-12 || s > prob.T + 1e-12)
      throw ConfigError("pde solve: output times must lie in [0, T]");

  GridField u(g), next(g);
  parallel_for(g.size(), exec, [&](std::size_t j) { u[j] = prob.u0->value(g.coord(j)); });

  SolveReport rep;
  double P = prob.p_bound;
  if (P <= 0.0) {
    double gm = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) gm = std::max(gm, norm_inf(node_gradient(u, j)));
    P = 1.5 * gm + 1.0;
  }
  rep.p_bound = P;
  auto L = dissipation_bounds(prob.sys, g, P);

  // parabolic restriction, probed on the initial data
  double lam = 0.0;
  const std::size_t stride = std::max<std::size_t>(1, g.size() / 2048);
  for (std::size_t j = 0; j < g.size(); j += stride) {
    MatN X = node_hessian(u, j);
    VecN p = node_gradient(u, j);
    VecN x = g.coord(j);
    double dl = 1e-4 * (1.0 + norm_max(X));
    for (int a = 0; a < n; ++a) {
      MatN Xp = X, Xm = X;
      Xp(a, a) += dl;
      Xm(a, a) -= dl;
      lam = std::max(lam, std::fabs(prob.F(Xp, p, u[j], x, 0.0) - prob.F(Xm, p, u[j], x, 0.0)) /
                              (2.0 * dl));
    }
  }
  rep.lambda = lam;
  if (lam > 1e-14) {
    rep.required_dt = g.dx * g.dx / (2.0 * n * lam);
    if (prob.dt > rep.required_dt * (1.0 + 1e-9)) {
      char buf[200];
      std::snprintf(buf, sizeof buf,
                    "time step %.6g violates the parabolic restriction; required dt <= %.6g",
                    prob.dt, rep.required_dt);
      throw StepRestrictionError(buf, rep.required_dt);
    }
  }

  std::vector<double> gscratch(g.size());
  auto check_gradients = [&](long long step) {
    double worst = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) worst = std::max(worst, gscratch[j]);
    if (worst > P) {
      char buf[200];
      std::snprintf(buf, sizeof buf,
                    "discrete gradient %.6g exceeded the dissipation cap %.6g at step %lld; "
                    "rerun with a larger p_bound",
                    worst, P, step);
      throw NumericalError(buf);
    }
  };

  double t = 0.0;
  std::size_t oi = 0;
  auto emit = [&](double tt) {
    rep.times.push_back(tt);
    rep.frames.push_back(u);
  };
  while (oi < outs.size() && outs[oi] <= 1e-12) {
    emit(0.0);
    ++oi;
  }

  long long step = 0;
  while (t < prob.T - 1e-12) {
    double tn = std::min(t + prob.dt, prob.T);
    if (oi < outs.size()) tn = std::min(tn, outs[oi]);

    VecN rem = path.increment(t, tn);
    int chunks = 0;
    for (;;) {
      double load = 0.0;
      for (int i = 0; i < m; ++i) {
        double la = 0.0;
        for (int a = 0; a < n; ++a) la += L[i][a];
        load += std::fabs(rem[i]) * la;
      }
      load /= g.dx;
      if (load <= 1e-15) break;
      double gamma = std::min(1.0, 0.9 / load);
      VecN dw = gamma * rem;
      lf_chunk(prob.sys, u, next, dw, L, gscratch, exec);
      std::swap(u.v, next.v);
      check_gradients(step);
      rem = rem - dw;
      ++chunks;
      if (gamma >= 1.0) break;
      if (chunks > 1000000) throw NumericalError("Hamiltonian substep count exploded");
    }

    f_step(prob.F, u, next, tn - t, t, exec);
    std::swap(u.v, next.v);

    t = tn;
    ++step;
    for (std::size_t j = 0; j < g.size(); ++j)
      if (!std::isfinite(u[j])) {
        char buf[120];
        std::snprintf(buf, sizeof buf, "non-finite value after step %lld (t = %.6g)", step, t);
        throw NumericalError(buf);
      }
    rep.cfl.push_back({t, chunks});
    rep.max_substeps = std::max(rep.max_substeps, chunks);
    rep.total_substeps += chunks;
    if (oi < outs.size() && std::fabs(t - outs[oi]) <= 1e-12) {
      emit(outs[oi]);
      ++oi;
    }
  }
  return rep;
}

}  // namespace

const GridField& SolveReport::at(double t) const {
  return frames[find_frame(times, t, "SolveReport")];
}

SolveReport solve_smooth(const PDEProblem& prob, const std::vector<double>& out_times,
                         Exec exec) {
  return march(prob, prob.path, out_times, exec);
}

RoughSolveReport solve_rough(const PDEProblem& prob, int levels,
                             const std::vector<double>& out_times, Exec exec) {
  if (levels < 2) throw ConfigError("solve_rough: need at least two dyadic levels");
  const auto& st = prob.path.sample_times();
  const std::size_t N = st.size();
  const std::size_t top = std::size_t{1} << (levels - 1);
  if (N < 2 || (N - 1) % top != 0)
    throw ConfigError("solve_rough: sample count minus one must divide by 2^(levels-1)");

  RoughSolveReport out;
  std::vector<SolveReport> reps;
  reps.reserve(static_cast<std::size_t>(levels));
  for (int lev = 0; lev < levels; ++lev) {
    const std::size_t stride = std::size_t{1} << (levels - 1 - lev);
    std::vector<double> ts;
    std::vector<VecN> vs;
    for (std::size_t k = 0; k < N; k += stride) {
      ts.push_back(st[k]);
      vs.push_back(prob.path.value(st[k]));
    }
    GeometricRoughPath appr = piecewise_linear_lift(ts, vs, prob.path.alpha());
    out.cauchy.strides.push_back(static_cast<int>(stride));
    reps.push_back(march(prob, appr, out_times, exec));
  }
  for (int k = 0; k + 1 < levels; ++k) {
    double d = 0.0;
    for (std::size_t f = 0; f < reps[std::size_t(k)].frames.size(); ++f) {
      const GridField& a = reps[std::size_t(k)].frames[f];
      const GridField& b = reps[std::size_t(k) + 1].frames[f];
      for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::fabs(a[j] - b[j]));
    }
    out.cauchy.d.push_back(d);
  }
  for (std::size_t k = 0; k + 1 < out.cauchy.d.size(); ++k)
    if (out.cauchy.d[k + 1] >= out.cauchy.d[k]) out.cauchy.decreasing = false;
  out.finest = std::move(reps.back());
  return out;
}

namespace {

struct Extrema {
  double lo = 0.0, hi = 0.0;
  long long count = 0;
};

// inf/sup of F over the ball |X|_F + |p|_2 + |r| <= R, x in the grid box,
// t in [0, T]: deterministic extreme rays plus seeded random probes.
Extrema f_extrema(const FOperator& F, int n, double R, const Box& box, double T, int samples,
                  std::uint64_t seed) {
  Extrema e;
  bool first = true;
  auto probe = [&](const MatN& X, const VecN& p, double r, const VecN& x, double t) {
    double v = F(X, p, r, x, t);
    if (!std::isfinite(v) || std::fabs(v) > 1e15)
      throw NumericalError("build_sub_super: F is unbounded on the sampled ball");
    if (first) {
      e.lo = e.hi = v;
      first = false;
    } else {
      e.lo = std::min(e.lo, v);
      e.hi = std::max(e.hi, v);
    }
    ++e.count;
  };

  std::vector<VecN> xs;
  VecN mid(n);
  for (int d = 0; d < n; ++d) mid[d] = 0.5 * (box.lo[d] + box.hi[d]);
  xs.push_back(mid);
  for (int corner = 0; corner < (1 << n); ++corner) {
    VecN x(n);
    for (int d = 0; d < n; ++d) x[d] = (corner >> d) & 1 ? box.hi[d] : box.lo[d];
    xs.push_back(x);
  }
  const double tprobe[3] = {0.0, 0.5 * T, T};
  MatN Z(n, n);
  VecN zp(n);
  for (const VecN& x : xs)
    for (double t : tprobe) {
      probe(Z, zp, 0.0, x, t);
      for (int sgn = -1; sgn <= 1; sgn += 2) {
        MatN I(n, n);
        for (int a = 0; a < n; ++a) I(a, a) = sgn * R / std::sqrt(double(n));
        probe(I, zp, 0.0, x, t);
        probe(Z, zp, sgn * R, x, t);
        for (int a = 0; a < n; ++a) {
          MatN Xa(n, n);
          Xa(a, a) = sgn * R;
          probe(Xa, zp, 0.0, x, t);
          VecN pa(n);
          pa[a] = sgn * R;
          probe(Z, pa, 0.0, x, t);
        }
      }
    }

  NormalSampler gauss(mix64(seed));
  std::mt19937_64 eng(mix64(seed ^ 0x9e3779b97f4a7c15ULL));
  auto unif = [&]() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; };
  for (int s = 0; s < samples; ++s) {
    MatN X(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) X(a, b) = X(b, a) = gauss();
    VecN p(n);
    for (int a = 0; a < n; ++a) p[a] = gauss();
    double r = gauss();
    double fro = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) fro += X(a, b) * X(a, b);
    double nrm = std::sqrt(fro) + norm2(p) + std::fabs(r);
    double target = (s % 2 == 0) ? R : R * std::cbrt(unif());
    double sc = nrm > 1e-300 ? target / nrm : 0.0;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) X(a, b) *= sc;
      p[a] *= sc;
    }
    r *= sc;
    VecN x(n);
    for (int d = 0; d < n; ++d) x[d] = box.lo[d] + (box.hi[d] - box.lo[d]) * unif();
    probe(X, p, r, x, T * unif());
  }
  return e;
}

double c2_norm(const LocalSnapshot& s) {
  const int n = s.grid.dim;
  double best = 0.0;
  for (std::size_t j = 0; j < s.grid.size(); ++j) {
    double dg = 0.0, hf = 0.0;
    for (int a = 0; a < n; ++a) {
      dg += s.dphi.at(j, a) * s.dphi.at(j, a);
      for (int b = 0; b < n; ++b) hf += s.d2phi.at(j, a * n + b) * s.d2phi.at(j, a * n + b);
    }
    best = std::max(best, std::fabs(s.phi[j]) + std::sqrt(dg) + std::sqrt(hf));
  }
  return best;
}

double c2_norm_field(const ScalarField& f, const GridSpec& g) {
  double best = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    VecN x = g.coord(j);
    MatN h = f.hessian(x);
    double hf = 0.0;
    for (int a = 0; a < g.dim; ++a)
      for (int b = 0; b < g.dim; ++b) hf += h(a, b) * h(a, b);
    best = std::max(best, std::fabs(f.value(x)) + norm2(f.gradient(x)) + std::sqrt(hf));
  }
  return best;
}

}  // namespace

const GridField& SubSuperPair::lower_at(double t) const {
  return lower[find_frame(times, t, "SubSuperPair")];
}

const GridField& SubSuperPair::upper_at(double t) const {
  return upper[find_frame(times, t, "SubSuperPair")];
}

SubSuperPair build_sub_super(const PDEProblem& prob, const ScalarField& phi,
                             const std::vector<double>& times_in, const SubSuperOptions& opts) {
  const GridSpec& g = prob.grid;
  const int n = g.dim;
  if (phi.dim() != n || g.dim != prob.sys.n())
    throw ConfigError("build_sub_super: dimension mismatch");

  std::vector<double> times = times_in;
  if (times.empty())
    for (int k = 0; k <= 8; ++k) times.push_back(prob.T * k / 8.0);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(),
                          [](double a, double b) { return std::fabs(a - b) < 1e-12; }),
              times.end());
  for (double t : times)
    if (t < -1e-12 || t > prob.T + 1e-12)
      throw ConfigError("build_sub_super: times must lie in [0, T]");
  if (times.empty() || times.front() > 1e-12) times.insert(times.begin(), 0.0);

  SubSuperPair pair;
  pair.times = times;

  HorizonReport hr = local_horizon(prob.sys, prob.path, phi, 0.0, g, opts.local);
  double h = std::min(prob.T, hr.h_forward);
  if (h <= 0.0)
    throw HorizonError("build_sub_super: the datum loses invertibility before the first sample");
  pair.h = h;

  // first-window evolutions, plus the window end itself
  std::vector<double> wtimes;
  for (double t : times)
    if (t > 1e-12 && t <= h + 1e-12) wtimes.push_back(t);
  bool h_extra = wtimes.empty() || std::fabs(wtimes.back() - h) > 1e-12;
  if (h_extra) wtimes.push_back(h);
  std::vector<LocalSnapshot> wsnaps;
  wsnaps.reserve(wtimes.size());
  for (double t : wtimes)
    wsnaps.push_back(local_apply(prob.sys, prob.path, phi, 0.0, t, g, opts.local));

  double R = c2_norm_field(phi, g);
  for (const LocalSnapshot& s : wsnaps) R = std::max(R, c2_norm(s));
  pair.R = R;
  Extrema ex = f_extrema(prob.F, n, R, g.box(), prob.T, opts.ball_samples, opts.seed);
  pair.C_lower = ex.lo;
  pair.C_upper = ex.hi;
  pair.f_samples = ex.count;

  // block machinery past the first window
  ScalarFieldPtr zero = zero_field(n);
  double h0 = 0.0;
  int blocks = 0;
  if (prob.T > h + 1e-12) {
    HorizonReport hz = local_horizon(prob.sys, prob.path, *zero, h, g, opts.local);
    h0 = std::min(prob.T - h, hz.h_forward);
    if (h0 <= 0.0)
      throw HorizonError("build_sub_super: the zero datum loses invertibility immediately");
    pair.h0 = h0;
    blocks = static_cast<int>(std::ceil((prob.T - h) / h0 - 1e-9));

    double R0 = 0.0;
    for (int q = 1; q <= 4; ++q) {
      LocalSnapshot s =
          local_apply(prob.sys, prob.path, *zero, h, h + h0 * q / 4.0, g, opts.local);
      R0 = std::max(R0, c2_norm(s));
    }
    pair.R0 = R0;
    Extrema ex0 =
        f_extrema(prob.F, n, R0, g.box(), prob.T, opts.ball_samples, mix64(opts.seed + 1));
    pair.C0_lower = ex0.lo;
    pair.C0_upper = ex0.hi;
    pair.f_samples += ex0.count;

    // running restart shifts M_k: chained through the block ends
    const LocalSnapshot& sh = wsnaps.back();  // at t = h
    GridField lo_end(g), up_end(g);
    for (std::size_t j = 0; j < g.size(); ++j) {
      lo_end[j] = sh.phi[j] + pair.C_lower * h;
      up_end[j] = sh.phi[j] + pair.C_upper * h;
    }
    for (int k = 0; k < blocks; ++k) {
      double mlo = lo_end[0], mup = up_end[0];
      for (std::size_t j = 0; j < g.size(); ++j) {
        mlo = std::min(mlo, lo_end[j]);
        mup = std::max(mup, up_end[j]);
      }
      pair.M_lower.push_back(std::max(0.0, -mlo));
      pair.M_upper.push_back(std::max(0.0, mup));
      double sk = h + k * h0;
      double send = std::min(sk + h0, prob.T);
      if (send < prob.T - 1e-12 || k + 1 < blocks) {
        LocalSnapshot s = local_apply(prob.sys, prob.path, *zero, sk, send, g, opts.local);
        for (std::size_t j = 0; j < g.size(); ++j) {
          lo_end[j] = s.phi[j] - pair.M_lower.back() + pair.C0_lower * (send - sk);
          up_end[j] = s.phi[j] + pair.M_upper.back() + pair.C0_upper * (send - sk);
        }
      }
    }
  }

  // assemble the requested frames
  for (double t : times) {
    GridField lo(g), up(g);
    if (t <= 1e-12) {
      for (std::size_t j = 0; j < g.size(); ++j) lo[j] = up[j] = phi.value(g.coord(j));
    } else if (t <= h + 1e-12) {
      std::size_t w = 0;
      while (std::fabs(wtimes[w] - t) > 1e-12) ++w;
      const LocalSnapshot& s = wsnaps[w];
      for (std::size_t j = 0; j < g.size(); ++j) {
        lo[j] = s.phi[j] + pair.C_lower * t;
        up[j] = s.phi[j] + pair.C_upper * t;
      }
    } else {
      int k = std::min(blocks - 1, static_cast<int>((t - h - 1e-12) / h0));
      double sk = h + k * h0;
      LocalSnapshot s = local_apply(prob.sys, prob.path, *zero, sk, t, g, opts.local);
      for (std::size_t j = 0; j < g.size(); ++j) {
        lo[j] = s.phi[j] - pair.M_lower[std::size_t(k)] + pair.C0_lower * (t - sk);
        up[j] = s.phi[j] + pair.M_upper[std::size_t(k)] + pair.C0_upper * (t - sk);
      }
    }
    for (std::size_t j = 0; j < g.size(); ++j)
      if (lo[j] > up[j] + 1e-12) throw NumericalError("build_sub_super: the barriers crossed");
    pair.lower.push_back(std::move(lo));
    pair.upper.push_back(std::move(up));
  }
  return pair;
}

}  // namespace pvs
