#include "pvs/perron_verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "pvs/characteristics.hpp"
#include "pvs/errors.hpp"

namespace pvs {

namespace {

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return std::string(buf);
}

void validate_series(const FieldSeries& u, const char* who) {
  if (u.frames.empty() || u.times.size() != u.frames.size())
    throw ConfigError(std::string(who) + ": empty or inconsistent field series");
  for (std::size_t i = 0; i + 1 < u.times.size(); ++i)
    if (!(u.times[i] < u.times[i + 1]))
      throw ConfigError(std::string(who) + ": series times must be strictly increasing");
  for (const GridField& f : u.frames)
    if (!f.spec.compatible(u.frames.front().spec))
      throw ConfigError(std::string(who) + ": frames disagree on the grid");
}

void require_same_mesh(const FieldSeries& a, const FieldSeries& b, const char* who) {
  if (a.times.size() != b.times.size())
    throw ConfigError(std::string(who) + ": series disagree on the time mesh");
  for (std::size_t i = 0; i < a.times.size(); ++i)
    if (std::fabs(a.times[i] - b.times[i]) > 1e-12)
      throw ConfigError(std::string(who) + ": series disagree on the time mesh");
  if (!a.grid().compatible(b.grid()))
    throw ConfigError(std::string(who) + ": series disagree on the grid");
}

/// S(t,t0)phi for one window of mesh times; the anchor time keeps the datum
/// itself so no flow noise enters at t = t0.
struct EvolvedDatum {
  bool direct = false;
  LocalSnapshot snap;
};

std::vector<EvolvedDatum> evolve_window(const HamiltonianSystem& sys,
                                        const GeometricRoughPath& path, const ScalarField& phi,
                                        double t0, const std::vector<double>& times,
                                        const std::vector<std::size_t>& win, const GridSpec& g,
                                        const LocalOperatorOptions& opts) {
  std::vector<EvolvedDatum> ev(win.size());
  for (std::size_t k = 0; k < win.size(); ++k) {
    double t = times[win[k]];
    if (std::fabs(t - t0) <= 1e-14) {
      ev[k].direct = true;
      continue;
    }
    ev[k].snap = local_apply(sys, path, phi, t0, t, g, opts);
  }
  return ev;
}

double evolved_value(const EvolvedDatum& e, const ScalarField& phi, const GridSpec& g,
                     std::size_t node) {
  return e.direct ? phi.value(g.coord(node)) : e.snap.phi[node];
}

double evolved_grad_norm(const EvolvedDatum& e, const ScalarField& phi, const GridSpec& g,
                         std::size_t node) {
  if (e.direct) return norm2(phi.gradient(g.coord(node)));
  VecN d(g.dim);
  for (int c = 0; c < g.dim; ++c) d[c] = e.snap.dphi.at(node, c);
  return norm2(d);
}

/// Quadratic anchored at x0: <b, x-x0> + (1/2) <A (x-x0), x-x0>, zero at x0.
class AnchoredQuadratic final : public ScalarField {
 public:
  AnchoredQuadratic(const VecN& x0, const VecN& b, const MatN& A) : x0_(x0), b_(b), A_(A) {}
  int dim() const override { return x0_.n; }
  double value(const VecN& x) const override {
    VecN d = x - x0_;
    return dot(b_, d) + 0.5 * dot(matvec(A_, d), d);
  }
  VecN gradient(const VecN& x) const override { return b_ + matvec(A_, x - x0_); }
  MatN hessian(const VecN&) const override { return A_; }

 private:
  VecN x0_;
  VecN b_;
  MatN A_;
};

/// sup over 0 < |x - x0| <= r of |phi(x) - phi(x0) - <p, x-x0> - (1/2)<X(x-x0), x-x0>| / |x-x0|^2,
/// sampled on a lattice over the cube cut to the ball.
double sample_omega1(const ScalarField& phi, const VecN& x0, double r, const VecN& p,
                     const MatN& X) {
  const int n = phi.dim();
  const int per_axis = 33;
  const double phi0 = phi.value(x0);
  std::array<int, kMaxDim> idx{};
  std::size_t total = 1;
  for (int d = 0; d < n; ++d) total *= per_axis;
  double w1 = 0.0;
  for (std::size_t f = 0; f < total; ++f) {
    std::size_t rem = f;
    for (int d = n - 1; d >= 0; --d) {
      idx[d] = static_cast<int>(rem % per_axis);
      rem /= per_axis;
    }
    VecN d(n);
    for (int k = 0; k < n; ++k) d[k] = r * (2.0 * idx[k] / (per_axis - 1) - 1.0);
    double rr = norm2(d);
    if (rr > r || rr < 1e-12) continue;
    VecN x = x0 + d;
    double quad = phi0 + dot(p, d) + 0.5 * dot(matvec(X, d), d);
    w1 = std::max(w1, std::fabs(phi.value(x) - quad) / (rr * rr));
  }
  return w1;
}

std::size_t anchor_node(const GridSpec& g, const VecN& x0, const char* who) {
  std::array<int, kMaxDim> idx{};
  for (int d = 0; d < g.dim; ++d) {
    double s = (x0[d] - g.lo[d]) / g.dx;
    int i = static_cast<int>(std::lround(s));
    if (i < 0 || i >= g.shape[d] || std::fabs(s - i) > 1e-7)
      throw ConfigError(std::string(who) + ": the anchor is not a grid node");
    idx[d] = i;
  }
  return g.flat(idx);
}

}  // namespace

std::size_t FieldSeries::time_index(double t) const {
  for (std::size_t i = 0; i < times.size(); ++i)
    if (std::fabs(times[i] - t) <= 1e-9 * (1.0 + std::fabs(t))) return i;
  throw ConfigError(fmt("field series: no mesh time matches t = %.12g", t));
}

FieldSeries to_series(const SolveReport& rep) {
  FieldSeries s;
  s.times = rep.times;
  s.frames = rep.frames;
  validate_series(s, "to_series");
  return s;
}

FieldSeries lower_series(const SubSuperPair& pair) {
  FieldSeries s;
  s.times = pair.times;
  s.frames = pair.lower;
  validate_series(s, "lower_series");
  return s;
}

FieldSeries upper_series(const SubSuperPair& pair) {
  FieldSeries s;
  s.times = pair.times;
  s.frames = pair.upper;
  validate_series(s, "upper_series");
  return s;
}

SubsolutionReport check_subsolution(const FieldSeries& u,
                                    const std::vector<TestFunctionProbe>& probes,
                                    const FOperator& F, const HamiltonianSystem& sys,
                                    const GeometricRoughPath& path,
                                    const SubsolutionOptions& opts) {
  validate_series(u, "check_subsolution");
  const GridSpec& g = u.grid();
  SubsolutionReport rep;
  for (std::size_t pi = 0; pi < probes.size(); ++pi) {
    const TestFunctionProbe& pr = probes[pi];
    if (!pr.phi || pr.phi->dim() != g.dim)
      throw ConfigError("check_subsolution: probe datum missing or of the wrong dimension");
    if (pr.r <= 0.0 || pr.h <= 0.0)
      throw ConfigError("check_subsolution: probe window radii must be positive");

    std::vector<std::size_t> win;
    for (std::size_t i = 0; i < u.times.size(); ++i)
      if (std::fabs(u.times[i] - pr.t0) <= pr.h + 1e-12) win.push_back(i);
    if (win.empty())
      throw ConfigError(fmt("check_subsolution: probe %zu has no mesh times in its window", pi));

    auto ev = evolve_window(sys, path, *pr.phi, pr.t0, u.times, win, g, opts.local);

    double best = -std::numeric_limits<double>::infinity();
    std::size_t bk = 0, bj = 0;
    bool found = false;
    for (std::size_t k = 0; k < win.size(); ++k) {
      double t = u.times[win[k]];
      double psi = pr.psi(t);
      const GridField& uf = u.frames[win[k]];
      for (std::size_t j = 0; j < g.size(); ++j) {
        VecN x = g.coord(j);
        if (norm2(x - pr.x0) > pr.r + 1e-12) continue;
        double val = uf[j] - evolved_value(ev[k], *pr.phi, g, j) - psi;
        if (!found || val > best) {
          found = true;
          best = val;
          bk = k;
          bj = j;
        }
      }
    }
    if (!found)
      throw ConfigError(fmt("check_subsolution: probe %zu's ball contains no grid nodes", pi));

    ProbeResult res;
    res.probe = pi;
    res.x_star = g.coord(bj);
    res.t_star = u.times[win[bk]];
    // Spatial boundary maxima carry no information, and neither does a
    // maximum at the earliest window time (an observation-boundary
    // artifact). The latest window time does count: the defining windows
    // are half-open in time with the anchor at the right edge.
    res.interior = norm2(res.x_star - pr.x0) <= pr.r - g.dx + 1e-12 &&
                   (bk > 0 || win.size() == 1);
    if (res.interior) {
      VecN dphi(g.dim);
      MatN d2phi(g.dim, g.dim);
      if (ev[bk].direct) {
        dphi = pr.phi->gradient(res.x_star);
        d2phi = pr.phi->hessian(res.x_star);
      } else {
        const LocalSnapshot& s = ev[bk].snap;
        for (int d = 0; d < g.dim; ++d) dphi[d] = s.dphi.at(bj, d);
        for (int a = 0; a < g.dim; ++a)
          for (int b = 0; b < g.dim; ++b) d2phi(a, b) = s.d2phi.at(bj, a * g.dim + b);
      }
      double gap =
          pr.dpsi(res.t_star) - F(d2phi, dphi, u.frames[win[bk]][bj], res.x_star, res.t_star);
      res.violation = std::max(0.0, gap);
      res.flagged = res.violation > opts.tol;
    }
    rep.max_violation = std::max(rep.max_violation, res.violation);
    rep.probes.push_back(res);
  }
  return rep;
}

FieldSeries envelope(const std::vector<FieldSeries>& subs) {
  if (subs.empty()) throw ConfigError("envelope: no candidates given");
  for (const FieldSeries& s : subs) validate_series(s, "envelope");
  for (std::size_t k = 1; k < subs.size(); ++k)
    require_same_mesh(subs.front(), subs[k], "envelope");
  FieldSeries out = subs.front();
  for (std::size_t k = 1; k < subs.size(); ++k)
    for (std::size_t i = 0; i < out.frames.size(); ++i)
      for (std::size_t j = 0; j < out.frames[i].size(); ++j)
        out.frames[i][j] = std::max(out.frames[i][j], subs[k].frames[i][j]);
  return out;
}

double BumpSpec::delta() const { return gamma * std::min(r * r / 16.0, s / 8.0); }

BumpResult bump(const HamiltonianSystem& sys, const GeometricRoughPath& path, const FOperator& F,
                const FieldSeries& w, const TestFunctionProbe& probe, const BumpSpec& spec,
                double kappa, const BumpOptions& opts) {
  validate_series(w, "bump");
  const GridSpec& g = w.grid();
  const int n = g.dim;
  if (!probe.phi || probe.phi->dim() != n)
    throw ConfigError("bump: probe datum missing or of the wrong dimension");
  if (!(spec.gamma > 0.0 && spec.gamma < 1.0)) throw ConfigError("bump: gamma must lie in (0, 1)");
  if (spec.r <= 0.0 || spec.s <= 0.0 || kappa <= 0.0)
    throw ConfigError("bump: r, s and kappa must be positive");
  if (spec.r >= kappa || spec.s >= kappa || probe.h >= kappa)
    throw ConfigError(
        fmt("bump: kappa = %g admits no probe window: need r, s, h < kappa "
            "(r = %g, s = %g, h = %g)",
            kappa, spec.r, spec.s, probe.h));

  const std::size_t ti0 = w.time_index(probe.t0);
  const std::size_t j0 = anchor_node(g, probe.x0, "bump");

  BumpCertificate cert;
  cert.delta = spec.delta();
  cert.slack_time = spec.gamma * spec.s / 8.0;
  cert.slack_space = spec.gamma * spec.r * spec.r / 16.0;

  const VecN p = probe.phi->gradient(probe.x0);
  const MatN X = probe.phi->hessian(probe.x0);
  const double phi0 = probe.phi->value(probe.x0);

  cert.omega1 = sample_omega1(*probe.phi, probe.x0, spec.r, p, X);
  cert.omega2 = 0.5 * std::fabs(probe.b) * spec.s;
  if (cert.omega1 > 0.5 * spec.gamma || cert.omega2 > 0.5 * spec.gamma)
    throw ConfigError(
        fmt("bump: probe strays from its quadratic model: omega1(r) = %g, omega2(s) = %g "
            "must not exceed gamma/2 = %g",
            cert.omega1, cert.omega2, 0.5 * spec.gamma));

  // Strict failure of the super-solution inequality at the anchor. Without
  // it there is nothing to bump.
  const double w0 = w.frames[ti0][j0];
  cert.precondition_margin = probe.dpsi(probe.t0) - F(X, p, w0, probe.x0, probe.t0);
  const double margin = opts.margin_factor * opts.tol;
  if (cert.precondition_margin >= -margin) {
    cert.refused = true;
    BumpResult out;
    out.w_kappa = w;
    out.cert = cert;
    return out;
  }

  std::vector<std::size_t> win;  // mesh times strictly inside (t0 - s, t0 + s)
  for (std::size_t i = 0; i < w.times.size(); ++i)
    if (std::fabs(w.times[i] - probe.t0) < spec.s - 1e-12) win.push_back(i);

  auto sphi = evolve_window(sys, path, *probe.phi, probe.t0, w.times, win, g, opts.local);
  AnchoredQuadratic etahat(probe.x0, p, X - 2.0 * spec.gamma * MatN::identity(n));
  auto seta = evolve_window(sys, path, etahat, probe.t0, w.times, win, g, opts.local);

  // The probe must touch w from below at the anchor over the whole window.
  double gmin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < win.size(); ++k) {
    double t = w.times[win[k]];
    const GridField& wf = w.frames[win[k]];
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (norm2(g.coord(j) - probe.x0) >= spec.r) continue;
      gmin = std::min(gmin, wf[j] - evolved_value(sphi[k], *probe.phi, g, j) - probe.psi(t));
    }
  }
  double g_anchor = w0 - phi0;
  if (g_anchor > gmin + opts.tol)
    throw ConfigError(
        fmt("bump: the probe does not touch w from below at the anchor (defect %g)",
            g_anchor - gmin));

  // Gradient bound over the window for both evolved data, then the path
  // deviation it implies. The construction is only valid when characteristics
  // started inside the bump region cannot leave the probe ball.
  double R = 0.0;
  for (std::size_t k = 0; k < win.size(); ++k)
    for (std::size_t j = 0; j < g.size(); ++j)
      R = std::max(R, std::max(evolved_grad_norm(sphi[k], *probe.phi, g, j),
                               evolved_grad_norm(seta[k], etahat, g, j)));
  cert.R = R;
  DeviationSpec dev;
  dev.radius = R;
  dev.x_box = g.box();
  FlowMode mode = opts.local.auto_mode ? auto_flow_mode(sys) : opts.local.mode;
  cert.rho_R =
      deviation_modulus(sys, path, probe.t0, spec.s, dev, mode, opts.local.flow, opts.local.exec);
  if (cert.rho_R > spec.r / 8.0)
    throw ConfigError(
        fmt("bump: path deviation rho_R(s) = %g exceeds r/8 = %g; no admissible (r, s) "
            "fits under kappa = %g",
            cert.rho_R, spec.r / 8.0, kappa));

  // etahat must stay below the recentred datum on the probe ball; together
  // with rho_R <= r/8 that is all the locality the collar bounds use.
  for (std::size_t j = 0; j < g.size(); ++j) {
    VecN x = g.coord(j);
    if (norm2(x - probe.x0) > spec.r) continue;
    double gap = etahat.value(x) - (probe.phi->value(x) - phi0);
    if (gap > opts.tol)
      throw ConfigError(fmt("bump: etahat exceeds the probe datum inside the ball (defect %g)",
                            gap));
  }

  // Assemble what and take the max inside N_{7r/8, s}.
  const double r78 = 0.875 * spec.r;
  const double r58 = 0.625 * spec.r;
  BumpResult out;
  out.w_kappa = w;
  std::vector<GridField> what(win.size(), GridField(g));
  for (std::size_t k = 0; k < win.size(); ++k) {
    double dt = w.times[win[k]] - probe.t0;
    double tterm = probe.a * dt - spec.gamma * std::sqrt(dt * dt + cert.delta * cert.delta);
    GridField& wh = what[k];
    GridField& wk = out.w_kappa.frames[win[k]];
    for (std::size_t j = 0; j < g.size(); ++j) {
      wh[j] = w0 + cert.delta + evolved_value(seta[k], etahat, g, j) + tterm;
      if (norm2(g.coord(j) - probe.x0) < r78 - 1e-12 && wh[j] > wk[j]) wk[j] = wh[j];
    }
  }

  // Certificate. Gain at the anchor first; it is exact up to roundoff.
  cert.anchor_gain = out.w_kappa.frames[ti0][j0] - w0;
  for (std::size_t k = 0; k < win.size(); ++k) {
    const GridField& wk = out.w_kappa.frames[win[k]];
    const GridField& wf = w.frames[win[k]];
    for (std::size_t j = 0; j < g.size(); ++j)
      cert.sup_gain = std::max(cert.sup_gain, wk[j] - wf[j]);
  }
  bool gain_ok = cert.anchor_gain >= (1.0 - spec.gamma) * cert.delta - opts.tol;

  cert.unchanged_outside = true;
  for (std::size_t i = 0; i < w.times.size(); ++i) {
    bool t_inside = std::fabs(w.times[i] - probe.t0) < spec.s - 1e-12;
    for (std::size_t j = 0; j < g.size(); ++j) {
      bool x_inside = norm2(g.coord(j) - probe.x0) < r78 - 1e-12;
      if (t_inside && x_inside) continue;
      if (out.w_kappa.frames[i][j] != w.frames[i][j]) cert.unchanged_outside = false;
    }
  }

  // Collar minima of w - what against the quantitative slacks.
  struct CollarMin {
    double gap = std::numeric_limits<double>::infinity();
    VecN x;
    double t = 0.0;
    bool seen = false;
    void record(double v, const VecN& xx, double tt) {
      seen = true;
      if (v < gap) {
        gap = v;
        x = xx;
        t = tt;
      }
    }
  };
  CollarMin ctime, cspace;
  for (std::size_t k = 0; k < win.size(); ++k) {
    double t = w.times[win[k]];
    bool collar_t = std::fabs(t - probe.t0) > 0.5 * spec.s + 1e-12;
    const GridField& wf = w.frames[win[k]];
    for (std::size_t j = 0; j < g.size(); ++j) {
      double rx = norm2(g.coord(j) - probe.x0);
      if (rx >= r78 - 1e-12) continue;
      double gap = wf[j] - what[k][j];
      if (collar_t) ctime.record(gap, g.coord(j), t);
      if (rx > r58 + 1e-12) cspace.record(gap, g.coord(j), t);
    }
  }
  if (!ctime.seen || !cspace.seen)
    throw ConfigError("bump: the mesh is too coarse to sample the collars");
  cert.collar_time_min = ctime.gap;
  cert.collar_space_min = cspace.gap;
  bool time_ok = ctime.gap >= cert.slack_time - opts.tol;
  bool space_ok = cspace.gap >= cert.slack_space - opts.tol;
  bool collars_ok = time_ok && space_ok;
  if (!collars_ok) {
    const CollarMin& bad = time_ok ? cspace : ctime;
    cert.has_counterexample = true;
    cert.counterexample_x = bad.x;
    cert.counterexample_t = bad.t;
  }

  cert.passed = gain_ok && cert.unchanged_outside && collars_ok;
  out.cert = cert;
  return out;
}

CompareReport compare(const FieldSeries& u, const FieldSeries& v, double tol) {
  validate_series(u, "compare");
  validate_series(v, "compare");
  require_same_mesh(u, v, "compare");
  CompareReport rep;
  rep.times = u.times;
  rep.excess.resize(u.times.size(), 0.0);
  for (std::size_t i = 0; i < u.times.size(); ++i) {
    double e = 0.0;
    for (std::size_t j = 0; j < u.frames[i].size(); ++j)
      e = std::max(e, u.frames[i][j] - v.frames[i][j]);
    rep.excess[i] = std::max(0.0, e);
  }
  rep.initial = rep.excess.front();
  rep.nonincreasing_vs_initial = true;
  for (double e : rep.excess)
    if (e > rep.initial + tol) rep.nonincreasing_vs_initial = false;
  return rep;
}

}  // namespace pvs
