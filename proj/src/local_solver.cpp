#include "pvs/local_solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <string>
#include <vector>

#include "pvs/errors.hpp"

namespace pvs {

namespace {

FlowMode resolve_mode(const HamiltonianSystem& sys, const LocalOperatorOptions& o) {
  return o.auto_mode ? auto_flow_mode(sys) : o.mode;
}

int pad_cells(double dx, double pad) {
  return static_cast<int>(std::ceil(pad / dx - 1e-9)) + 2;
}

GridSpec padded(const GridSpec& g, int cells) {
  GridSpec s = g;
  for (int d = 0; d < g.dim; ++d) {
    s.lo[d] = g.lo[d] - cells * g.dx;
    s.shape[d] = g.shape[d] + 2 * cells;
  }
  return s;
}

// parallel_for with exception capture: the first thrown error is rethrown
// on the calling thread after the loop drains.
template <class Body>
void for_nodes(std::size_t count, Exec exec, Body&& body) {
  std::atomic<bool> bad{false};
  std::exception_ptr eptr;
  std::mutex mu;
  parallel_for(count, exec, [&](std::size_t i) {
    if (bad.load(std::memory_order_relaxed)) return;
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> g(mu);
      if (!bad.exchange(true)) eptr = std::current_exception();
    }
  });
  if (bad.load()) std::rethrow_exception(eptr);
}

struct ForwardData {
  ForwardFields f;
  MultiField jx;  // n*n components, the Newton Jacobian source
};

ForwardData forward_flow(const HamiltonianSystem& sys, const GeometricRoughPath& path,
                         const ScalarField& phi, double t0, double t, const GridSpec& seeds,
                         FlowMode mode, const LocalOperatorOptions& opts) {
  const int n = sys.n();
  ForwardData d;
  d.f.seeds = seeds;
  d.f.X = MultiField(seeds, n);
  d.f.P = MultiField(seeds, n);
  d.f.Z = GridField(seeds);
  d.f.det = GridField(seeds);
  d.jx = MultiField(seeds, n * n);
  for_nodes(seeds.size(), opts.exec, [&](std::size_t node) {
    VecN x0 = seeds.coord(node);
    CharState st = CharState::start(x0, phi.gradient(x0), phi.hessian(x0));
    st = flow(sys, path, st, t0, t, mode, opts.flow);
    for (int a = 0; a < n; ++a) {
      d.f.X.at(node, a) = st.x[a];
      d.f.P.at(node, a) = st.p[a];
    }
    d.f.Z[node] = st.z;
    d.f.det[node] = det(st.jx);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) d.jx.at(node, a * n + b) = st.jx(a, b);
  });
  double mn = d.f.det[0];
  for (std::size_t i = 1; i < d.f.det.size(); ++i) mn = std::min(mn, d.f.det[i]);
  d.f.min_det = mn;
  return d;
}

// Uniform bucket index over the forward images, used to seed the inverse
// map with the nearest image.
struct ImageIndex {
  VecN lo;
  double cell = 1.0;
  int dim = 1;
  std::array<int, kMaxDim> dims{};
  std::vector<std::vector<int>> buckets;

  static ImageIndex build(const ForwardData& fd) {
    const GridSpec& sg = fd.f.seeds;
    ImageIndex ix;
    ix.dim = sg.dim;
    ix.cell = sg.dx;
    VecN hi(sg.dim);
    ix.lo = VecN(sg.dim);
    for (int d = 0; d < sg.dim; ++d) {
      ix.lo[d] = fd.f.X.at(0, d);
      hi[d] = fd.f.X.at(0, d);
    }
    const std::size_t count = sg.size();
    for (std::size_t i = 1; i < count; ++i)
      for (int d = 0; d < sg.dim; ++d) {
        ix.lo[d] = std::min(ix.lo[d], fd.f.X.at(i, d));
        hi[d] = std::max(hi[d], fd.f.X.at(i, d));
      }
    std::size_t total = 1;
    for (int d = 0; d < sg.dim; ++d) {
      ix.dims[d] = static_cast<int>((hi[d] - ix.lo[d]) / ix.cell) + 2;
      total *= static_cast<std::size_t>(ix.dims[d]);
    }
    ix.buckets.resize(total);
    for (std::size_t i = 0; i < count; ++i) {
      std::array<int, kMaxDim> b{};
      for (int d = 0; d < sg.dim; ++d) b[d] = ix.clampb(d, fd.f.X.at(i, d));
      ix.buckets[ix.flatb(b)].push_back(static_cast<int>(i));
    }
    return ix;
  }

  int clampb(int d, double v) const {
    int b = static_cast<int>(std::floor((v - lo[d]) / cell));
    return std::min(std::max(b, 0), dims[d] - 1);
  }

  std::size_t flatb(const std::array<int, kMaxDim>& b) const {
    std::size_t f = 0;
    for (int d = 0; d < dim; ++d) f = f * static_cast<std::size_t>(dims[d]) + b[d];
    return f;
  }

  // Nearest forward image to y, by expanding Chebyshev rings of buckets.
  int nearest(const VecN& y, const MultiField& X) const {
    std::array<int, kMaxDim> c{};
    int maxring = 0;
    for (int d = 0; d < dim; ++d) {
      c[d] = clampb(d, y[d]);
      maxring = std::max(maxring, std::max(c[d], dims[d] - 1 - c[d]));
    }
    int best = -1;
    double best2 = 0.0;
    int found_ring = -1;
    for (int k = 0; k <= maxring; ++k) {
      if (found_ring >= 0 && k > found_ring + 1) break;
      std::array<int, kMaxDim> off{};
      for (int d = 0; d < dim; ++d) off[d] = -k;
      for (;;) {
        int cheb = 0;
        for (int d = 0; d < dim; ++d) cheb = std::max(cheb, std::abs(off[d]));
        if (cheb == k) {
          std::array<int, kMaxDim> b{};
          bool in = true;
          for (int d = 0; d < dim; ++d) {
            b[d] = c[d] + off[d];
            if (b[d] < 0 || b[d] >= dims[d]) in = false;
          }
          if (in) {
            for (int id : buckets[flatb(b)]) {
              double d2 = 0.0;
              for (int d = 0; d < dim; ++d) {
                double e = X.at(static_cast<std::size_t>(id), d) - y[d];
                d2 += e * e;
              }
              if (best < 0 || d2 < best2) {
                best = id;
                best2 = d2;
              }
            }
          }
        }
        int d = 0;
        while (d < dim && ++off[d] > k) off[d++] = -k;
        if (d == dim) break;
      }
      if (best >= 0 && found_ring < 0) found_ring = k;
    }
    return best;
  }
};

struct Inverted {
  VecN x0;
  int iters = 0;
  double resid = 0.0;
};

Inverted invert_node(const VecN& y, const ForwardData& fd, const ImageIndex& ix,
                     const LocalOperatorOptions& opts, std::size_t out_node) {
  const GridSpec& sg = fd.f.seeds;
  const int n = sg.dim;
  const double tol = opts.newton_tol * (1.0 + norm_inf(y));

  auto residual = [&](const VecN& x) {
    VecN g(n);
    for (int a = 0; a < n; ++a) g[a] = interp(fd.f.X, a, x) - y[a];
    return g;
  };
  auto fail = [&](const char* what, double r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "inverse map %s at node %zu (residual %.3e)", what, out_node, r);
    throw InverseMapError(buf);
  };

  int near = ix.nearest(y, fd.f.X);
  VecN x = sg.coord(static_cast<std::size_t>(near));
  VecN g = residual(x);
  double gn = norm2(g);
  int it = 0;
  while (norm_inf(g) > tol) {
    if (++it > opts.newton_max_iter) fail("did not converge", norm_inf(g));
    MatN J(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) J(a, b) = interp(fd.jx, a * n + b, x);
    VecN step;
    try {
      step = solve(J, -1.0 * g);
    } catch (const std::exception&) {
      fail("hit a singular Jacobian", norm_inf(g));
    }
    bool accepted = false;
    double lam = 1.0;
    for (int trial = 0; trial < 8; ++trial) {
      VecN xn = x + lam * step;
      VecN gnew = residual(xn);
      double gnn = norm2(gnew);
      if (gnn < gn) {
        x = xn;
        g = gnew;
        gn = gnn;
        accepted = true;
        break;
      }
      lam *= 0.5;
    }
    if (!accepted) fail("stalled", norm_inf(g));
  }
  return {x, it, norm_inf(g)};
}

// Centered gradient of one component of a vector field, one-sided on the
// boundary (same stencil as node_gradient).
VecN comp_gradient(const MultiField& f, int c, std::size_t node) {
  const GridSpec& g = f.spec;
  auto idx = g.unflat(node);
  VecN grad(g.dim);
  for (int d = 0; d < g.dim; ++d) {
    auto ip = idx, im = idx;
    if (idx[d] == 0) {
      ip[d] = 1;
      grad[d] = (f.at(g.flat(ip), c) - f.at(node, c)) / g.dx;
    } else if (idx[d] == g.shape[d] - 1) {
      im[d] = idx[d] - 1;
      grad[d] = (f.at(node, c) - f.at(g.flat(im), c)) / g.dx;
    } else {
      ip[d] = idx[d] + 1;
      im[d] = idx[d] - 1;
      grad[d] = (f.at(g.flat(ip), c) - f.at(g.flat(im), c)) / (2.0 * g.dx);
    }
  }
  return grad;
}

class ShiftedField final : public ScalarField {
 public:
  ShiftedField(const ScalarField& base, double k) : base_(base), k_(k) {}
  int dim() const override { return base_.dim(); }
  double value(const VecN& x) const override { return base_.value(x) + k_; }
  VecN gradient(const VecN& x) const override { return base_.gradient(x); }
  MatN hessian(const VecN& x) const override { return base_.hessian(x); }

 private:
  const ScalarField& base_;
  double k_;
};

class GridDatum final : public ScalarField {
 public:
  explicit GridDatum(const LocalSnapshot& s) : u_(s.phi), du_(s.dphi), d2u_(s.d2phi) {}
  int dim() const override { return u_.spec.dim; }
  double value(const VecN& x) const override { return interp(u_, x); }
  VecN gradient(const VecN& x) const override {
    VecN g(dim());
    for (int a = 0; a < dim(); ++a) g[a] = interp(du_, a, x);
    return g;
  }
  MatN hessian(const VecN& x) const override {
    const int n = dim();
    MatN h(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) h(a, b) = interp(d2u_, a * n + b, x);
    return sym(h);
  }

 private:
  GridField u_;
  MultiField du_, d2u_;
};

}  // namespace

double suggested_padding(const HamiltonianSystem& sys, const GeometricRoughPath& path, double t0,
                         double t, double R, const Box& xbox, const LocalOperatorOptions& opts) {
  DeviationSpec ds;
  ds.radius = R;
  ds.x_box = xbox;
  return deviation_modulus(sys, path, t0, std::fabs(t - t0), ds, resolve_mode(sys, opts),
                           opts.flow, opts.exec);
}

LocalSnapshot local_apply(const HamiltonianSystem& sys, const GeometricRoughPath& path,
                          const ScalarField& phi, double t0, double t, const GridSpec& out,
                          const LocalOperatorOptions& opts) {
  const int n = sys.n();
  if (out.dim != n) throw ConfigError("local_apply: grid dimension does not match the system");
  if (phi.dim() != n) throw ConfigError("local_apply: datum dimension does not match the system");
  FlowMode mode = resolve_mode(sys, opts);

  double pad = opts.pad;
  const bool autopad = pad < 0.0;
  if (autopad) {
    double gmax = parallel_max(out.size(), opts.exec,
                               [&](std::size_t i) { return norm2(phi.gradient(out.coord(i))); });
    pad = std::max(suggested_padding(sys, path, t0, t, 1.25 * gmax + 0.25, out.box(), opts),
                   out.dx);
  }

  // A contracting flow pulls the preimage of the output box far outside the
  // travel bound, so in auto mode grow the seed box until the forward image
  // hull covers the output box with one cell to spare.
  ForwardData fd;
  for (int attempt = 0;; ++attempt) {
    GridSpec seeds = padded(out, pad_cells(out.dx, pad));
    fd = forward_flow(sys, path, phi, t0, t, seeds, mode, opts);
    if (fd.f.min_det < opts.theta_inv) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "forward map lost invertibility: min det %.6g below floor %.6g at t = %.6g",
                    fd.f.min_det, opts.theta_inv, t);
      throw HorizonError(buf);
    }
    if (!autopad) break;
    bool covered = true;
    for (int d = 0; d < n && covered; ++d) {
      double lo = fd.f.X.at(0, d), hi = lo;
      for (std::size_t i = 1; i < fd.f.seeds.size(); ++i) {
        lo = std::min(lo, fd.f.X.at(i, d));
        hi = std::max(hi, fd.f.X.at(i, d));
      }
      if (lo > out.lo[d] - out.dx || hi < out.hi()[d] + out.dx) covered = false;
    }
    if (covered) break;
    if (attempt >= 7)
      throw InverseMapError(
          "forward image cannot cover the output box; the datum is too steep for this window");
    pad *= 2.0;
  }
  ImageIndex ix = ImageIndex::build(fd);

  LocalSnapshot snap;
  snap.t0 = t0;
  snap.t = t;
  snap.grid = out;
  snap.phi = GridField(out);
  snap.dphi = MultiField(out, n);
  snap.d2phi = MultiField(out, n * n);
  snap.det = GridField(out);

  std::vector<double> resid(out.size());
  std::vector<int> iters(out.size());
  for_nodes(out.size(), opts.exec, [&](std::size_t node) {
    VecN y = out.coord(node);
    Inverted inv = invert_node(y, fd, ix, opts, node);
    snap.phi[node] = phi.value(inv.x0) + interp(fd.f.Z, inv.x0);
    for (int a = 0; a < n; ++a) snap.dphi.at(node, a) = interp(fd.f.P, a, inv.x0);
    snap.det[node] = interp(fd.f.det, inv.x0);
    resid[node] = inv.resid;
    iters[node] = inv.iters;
  });
  for (std::size_t i = 0; i < out.size(); ++i) {
    snap.max_newton_residual = std::max(snap.max_newton_residual, resid[i]);
    snap.max_newton_iters = std::max(snap.max_newton_iters, iters[i]);
  }

  parallel_for(out.size(), opts.exec, [&](std::size_t node) {
    MatN rows(n, n);
    for (int a = 0; a < n; ++a) {
      VecN ga = comp_gradient(snap.dphi, a, node);
      for (int b = 0; b < n; ++b) rows(a, b) = ga[b];
    }
    MatN h = sym(rows);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) snap.d2phi.at(node, a * n + b) = h(a, b);
  });

  snap.fwd = std::move(fd.f);
  return snap;
}

HorizonReport local_horizon(const HamiltonianSystem& sys, const GeometricRoughPath& path,
                            const ScalarField& phi, double t0, const GridSpec& seeds,
                            const LocalOperatorOptions& opts) {
  if (seeds.dim != sys.n()) throw ConfigError("local_horizon: grid dimension mismatch");
  FlowMode mode = resolve_mode(sys, opts);
  HorizonReport rep;
  rep.t0 = t0;
  rep.theta_inv = opts.theta_inv;

  const std::size_t count = seeds.size();
  std::vector<double> dets(count);

  auto sweep = [&](bool forward, double& reached, bool& crossed, double& det_at_h) {
    std::vector<double> ts;
    for (double s : path.sample_times()) {
      if (forward && s > t0) ts.push_back(s);
      if (!forward && s < t0) ts.push_back(s);
    }
    if (!forward) std::reverse(ts.begin(), ts.end());
    std::vector<FlowCursor> cur;
    cur.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      VecN x0 = seeds.coord(i);
      cur.emplace_back(sys, path, CharState::start(x0, phi.gradient(x0), phi.hessian(x0)), t0,
                       mode, opts.flow);
    }
    reached = 0.0;
    crossed = false;
    for (double s : ts) {
      for_nodes(count, opts.exec, [&](std::size_t i) {
        cur[i].advance(s);
        dets[i] = det(cur[i].state().jx);
      });
      double mn = dets[0];
      for (std::size_t i = 1; i < count; ++i) mn = std::min(mn, dets[i]);
      if (mn < opts.theta_inv) {
        crossed = true;
        return;
      }
      reached = std::fabs(s - t0);
      det_at_h = mn;
    }
  };

  double det_f = 1.0, det_b = 1.0;
  sweep(true, rep.h_forward, rep.crossed_forward, det_f);
  sweep(false, rep.h_backward, rep.crossed_backward, det_b);

  if (rep.crossed_forward && rep.crossed_backward) {
    rep.h = std::min(rep.h_forward, rep.h_backward);
    rep.min_det_at_h = rep.h_forward <= rep.h_backward ? det_f : det_b;
  } else if (rep.crossed_forward) {
    rep.h = rep.h_forward;
    rep.min_det_at_h = det_f;
  } else if (rep.crossed_backward) {
    rep.h = rep.h_backward;
    rep.min_det_at_h = det_b;
  } else {
    rep.h = std::max(rep.h_forward, rep.h_backward);
    rep.min_det_at_h = std::min(det_f, det_b);
  }
  return rep;
}

double PropertyReport::max_comparison() const {
  double m = 0.0;
  for (double d : comparison_defects) m = std::max(m, d);
  return m;
}

double PropertyReport::max_semigroup() const {
  double m = 0.0;
  for (double d : semigroup_defects) m = std::max(m, d);
  return m;
}

PropertyReport check_properties(const HamiltonianSystem& sys, const GeometricRoughPath& path,
                                const ScalarField& phi1, const ScalarField& phi2, double k,
                                double t0, const std::vector<double>& times, const GridSpec& out,
                                const LocalOperatorOptions& opts) {
  if (times.empty()) throw ConfigError("check_properties: need at least one time");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] <= t0 || (i > 0 && times[i] <= times[i - 1]))
      throw ConfigError("check_properties: times must increase strictly after t0");
  }

  double gmax = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    VecN y = out.coord(i);
    gmax = std::max({gmax, norm2(phi1.gradient(y)), norm2(phi2.gradient(y))});
  }
  double rho =
      suggested_padding(sys, path, t0, times.back(), 1.25 * gmax + 0.25, out.box(), opts);
  LocalOperatorOptions o = opts;
  o.pad = 2.0 * rho;

  PropertyReport rep;
  for (double t : times) {
    LocalSnapshot s1 = local_apply(sys, path, phi1, t0, t, out, o);
    LocalSnapshot s2 = local_apply(sys, path, phi2, t0, t, out, o);
    ShiftedField shifted(phi1, k);
    LocalSnapshot s1k = local_apply(sys, path, shifted, t0, t, out, o);

    double shift = 0.0, sup_evolved = s1.phi[0] - s2.phi[0];
    for (std::size_t i = 0; i < out.size(); ++i) {
      shift = std::max(shift, std::fabs(s1k.phi[i] - s1.phi[i] - k));
      sup_evolved = std::max(sup_evolved, s1.phi[i] - s2.phi[i]);
    }
    rep.shift_defect = std::max(rep.shift_defect, shift);

    const GridSpec& sg = s1.fwd.seeds;
    VecN y0 = sg.coord(std::size_t{0});
    double sup_initial = phi1.value(y0) - phi2.value(y0);
    for (std::size_t i = 1; i < sg.size(); ++i) {
      VecN y = sg.coord(i);
      sup_initial = std::max(sup_initial, phi1.value(y) - phi2.value(y));
    }
    rep.comparison_defects.push_back(std::max(0.0, sup_evolved - sup_initial));
  }

  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    double ts = times[i], tr = times[i + 1];
    LocalSnapshot direct = local_apply(sys, path, phi1, t0, tr, out, o);
    GridSpec mid_grid = padded(out, pad_cells(out.dx, o.pad));
    LocalSnapshot stage1 = local_apply(sys, path, phi1, t0, ts, mid_grid, o);
    ScalarFieldPtr datum = snapshot_datum(stage1);
    LocalSnapshot stage2 = local_apply(sys, path, *datum, ts, tr, out, o);
    double defect = 0.0;
    for (std::size_t q = 0; q < out.size(); ++q)
      defect = std::max(defect, std::fabs(stage2.phi[q] - direct.phi[q]));
    rep.semigroup_defects.push_back(defect);
  }
  return rep;
}

DependenceReport domain_of_dependence_check(const HamiltonianSystem& sys,
                                            const GeometricRoughPath& path,
                                            const ScalarField& phi1, const ScalarField& phi2,
                                            double t0, double t, const AnnulusSpec& K, double R,
                                            const GridSpec& out,
                                            const LocalOperatorOptions& opts) {
  DeviationSpec ds;
  ds.radius = R;
  ds.x_box = out.box();
  FlowMode mode = resolve_mode(sys, opts);
  FlowOptions fo = opts.flow;
  DependenceReport rep;
  rep.rho = deviation_modulus(sys, path, t0, std::fabs(t - t0), ds, mode, fo, opts.exec);

  LocalOperatorOptions o = opts;
  if (o.pad < 0.0) o.pad = rep.rho;
  LocalSnapshot s1 = local_apply(sys, path, phi1, t0, t, out, o);
  LocalSnapshot s2 = local_apply(sys, path, phi2, t0, t, out, o);

  bool any_k = false, any_krho = false;
  rep.sup_global = s1.phi[0] - s2.phi[0];
  for (std::size_t i = 0; i < out.size(); ++i) {
    VecN y = out.coord(i);
    double r = norm2(y - K.center);
    double evolved = s1.phi[i] - s2.phi[i];
    rep.sup_global = std::max(rep.sup_global, evolved);
    if (r >= K.r_in && r <= K.r_out) {
      double initial = phi1.value(y) - phi2.value(y);
      rep.sup_initial = any_k ? std::max(rep.sup_initial, initial) : initial;
      any_k = true;
    }
    if (r >= K.r_in + rep.rho && r <= K.r_out - rep.rho) {
      rep.sup_evolved = any_krho ? std::max(rep.sup_evolved, evolved) : evolved;
      any_krho = true;
    }
  }
  rep.shrunken_empty = !any_krho;
  if (!any_k) throw ConfigError("domain_of_dependence_check: no grid nodes inside the annulus");
  rep.defect = rep.shrunken_empty ? 0.0 : std::max(0.0, rep.sup_evolved - rep.sup_initial);
  return rep;
}

ScalarFieldPtr snapshot_datum(const LocalSnapshot& snap) {
  return std::make_shared<GridDatum>(snap);
}

}  // namespace pvs
