#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "pvs/linalg.hpp"

namespace pvs {

struct Box {
  VecN lo, hi;
  bool contains(const VecN& x, double margin = 0.0) const {
    for (int d = 0; d < lo.n; ++d)
      if (x[d] < lo[d] + margin || x[d] > hi[d] - margin) return false;
    return true;
  }
};

/// Uniform rectangular grid with equal spacing in every axis. Flat indices
/// are row-major with axis 0 slowest.
struct GridSpec {
  int dim = 1;
  VecN lo;
  std::array<int, kMaxDim> shape{};
  double dx = 0.0;

  static GridSpec make(const VecN& lo, double dx, const std::array<int, kMaxDim>& shape, int dim) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("GridSpec: dim out of range");
    if (dx <= 0.0) throw std::invalid_argument("GridSpec: dx must be positive");
    GridSpec g;
    g.dim = dim;
    g.lo = lo;
    g.shape = shape;
    g.dx = dx;
    for (int d = 0; d < dim; ++d)
      if (shape[d] < 2) throw std::invalid_argument("GridSpec: need at least 2 points per axis");
    return g;
  }

  /// Grid spanning [lo, hi] with the given node count per axis; spacing must
  /// come out equal in every axis to within roundoff.
  static GridSpec over_box(const Box& box, int nodes_per_axis) {
    GridSpec g;
    g.dim = box.lo.n;
    g.lo = box.lo;
    g.dx = (box.hi[0] - box.lo[0]) / (nodes_per_axis - 1);
    for (int d = 0; d < g.dim; ++d) {
      double dxd = (box.hi[d] - box.lo[d]) / (nodes_per_axis - 1);
      if (std::fabs(dxd - g.dx) > 1e-12 * std::fabs(g.dx))
        throw std::invalid_argument("GridSpec: box is not square for a single node count");
      g.shape[d] = nodes_per_axis;
    }
    return g;
  }

  std::size_t size() const {
    std::size_t s = 1;
    for (int d = 0; d < dim; ++d) s *= static_cast<std::size_t>(shape[d]);
    return s;
  }

  VecN hi() const {
    VecN h(dim);
    for (int d = 0; d < dim; ++d) h[d] = lo[d] + dx * (shape[d] - 1);
    return h;
  }

  Box box() const { return Box{lo, hi()}; }

  std::size_t flat(const std::array<int, kMaxDim>& idx) const {
    std::size_t f = 0;
    for (int d = 0; d < dim; ++d) f = f * shape[d] + idx[d];
    return f;
  }

  std::array<int, kMaxDim> unflat(std::size_t f) const {
    std::array<int, kMaxDim> idx{};
    for (int d = dim - 1; d >= 0; --d) {
      idx[d] = static_cast<int>(f % shape[d]);
      f /= shape[d];
    }
    return idx;
  }

  VecN coord(const std::array<int, kMaxDim>& idx) const {
    VecN x(dim);
    for (int d = 0; d < dim; ++d) x[d] = lo[d] + dx * idx[d];
    return x;
  }

  VecN coord(std::size_t f) const { return coord(unflat(f)); }

  bool compatible(const GridSpec& o) const {
    if (dim != o.dim || dx != o.dx) return false;
    for (int d = 0; d < dim; ++d)
      if (shape[d] != o.shape[d] || lo[d] != o.lo[d]) return false;
    return true;
  }
};

struct GridField {
  GridSpec spec;
  std::vector<double> v;

  GridField() = default;
  explicit GridField(const GridSpec& g, double fill = 0.0) : spec(g), v(g.size(), fill) {}

  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
  std::size_t size() const { return v.size(); }
};

/// Field of n-vectors (or n*n matrices flattened) stored per component.
struct MultiField {
  GridSpec spec;
  int comps = 0;
  std::vector<double> v;

  MultiField() = default;
  MultiField(const GridSpec& g, int ncomp) : spec(g), comps(ncomp), v(g.size() * ncomp, 0.0) {}

  double& at(std::size_t node, int c) { return v[node * comps + c]; }
  double at(std::size_t node, int c) const { return v[node * comps + c]; }
};

namespace detail {
struct InterpStencil {
  std::array<int, kMaxDim> base{};
  std::array<double, kMaxDim> w{};
};

inline InterpStencil interp_stencil(const GridSpec& g, const VecN& q) {
  InterpStencil st;
  for (int d = 0; d < g.dim; ++d) {
    double s = (q[d] - g.lo[d]) / g.dx;
    int i0 = static_cast<int>(std::floor(s));
    if (i0 < 0) i0 = 0;
    if (i0 > g.shape[d] - 2) i0 = g.shape[d] - 2;
    double w = s - i0;
    if (w < 0.0) w = 0.0;
    if (w > 1.0) w = 1.0;
    st.base[d] = i0;
    st.w[d] = w;
  }
  return st;
}
}  // namespace detail

/// Multilinear interpolation; queries outside the box are clamped to it.
inline double interp(const GridField& f, const VecN& q) {
  const GridSpec& g = f.spec;
  auto st = detail::interp_stencil(g, q);
  double acc = 0.0;
  int corners = 1 << g.dim;
  for (int c = 0; c < corners; ++c) {
    std::array<int, kMaxDim> idx{};
    double w = 1.0;
    for (int d = 0; d < g.dim; ++d) {
      int bit = (c >> d) & 1;
      idx[d] = st.base[d] + bit;
      w *= bit ? st.w[d] : (1.0 - st.w[d]);
    }
    acc += w * f.v[g.flat(idx)];
  }
  return acc;
}

inline double interp(const MultiField& f, int comp, const VecN& q) {
  const GridSpec& g = f.spec;
  auto st = detail::interp_stencil(g, q);
  double acc = 0.0;
  int corners = 1 << g.dim;
  for (int c = 0; c < corners; ++c) {
    std::array<int, kMaxDim> idx{};
    double w = 1.0;
    for (int d = 0; d < g.dim; ++d) {
      int bit = (c >> d) & 1;
      idx[d] = st.base[d] + bit;
      w *= bit ? st.w[d] : (1.0 - st.w[d]);
    }
    acc += w * f.at(g.flat(idx), comp);
  }
  return acc;
}

/// Centered gradient at a node, one-sided on the boundary.
inline VecN node_gradient(const GridField& f, std::size_t node) {
  const GridSpec& g = f.spec;
  auto idx = g.unflat(node);
  VecN grad(g.dim);
  for (int d = 0; d < g.dim; ++d) {
    auto ip = idx, im = idx;
    if (idx[d] == 0) {
      ip[d] = 1;
      grad[d] = (f.v[g.flat(ip)] - f.v[node]) / g.dx;
    } else if (idx[d] == g.shape[d] - 1) {
      im[d] = idx[d] - 1;
      grad[d] = (f.v[node] - f.v[g.flat(im)]) / g.dx;
    } else {
      ip[d] = idx[d] + 1;
      im[d] = idx[d] - 1;
      grad[d] = (f.v[g.flat(ip)] - f.v[g.flat(im)]) / (2.0 * g.dx);
    }
  }
  return grad;
}

/// Centered Hessian at a node; indices are clamped one cell in from the
/// boundary so the stencil always fits.
inline MatN node_hessian(const GridField& f, std::size_t node) {
  const GridSpec& g = f.spec;
  auto idx = g.unflat(node);
  for (int d = 0; d < g.dim; ++d) {
    if (idx[d] == 0) idx[d] = 1;
    if (idx[d] == g.shape[d] - 1) idx[d] = g.shape[d] - 2;
  }
  MatN h(g.dim, g.dim);
  double c = f.v[g.flat(idx)];
  for (int d = 0; d < g.dim; ++d) {
    auto ip = idx, im = idx;
    ip[d] += 1;
    im[d] -= 1;
    h(d, d) = (f.v[g.flat(ip)] - 2.0 * c + f.v[g.flat(im)]) / (g.dx * g.dx);
    for (int e = d + 1; e < g.dim; ++e) {
      auto pp = idx, pm = idx, mp = idx, mm = idx;
      pp[d] += 1; pp[e] += 1;
      pm[d] += 1; pm[e] -= 1;
      mp[d] -= 1; mp[e] += 1;
      mm[d] -= 1; mm[e] -= 1;
      double cross = (f.v[g.flat(pp)] - f.v[g.flat(pm)] - f.v[g.flat(mp)] + f.v[g.flat(mm)]) /
                     (4.0 * g.dx * g.dx);
      h(d, e) = cross;
      h(e, d) = cross;
    }
  }
  return h;
}

}  // namespace pvs
