#include "pvs/rough_path.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pvs/errors.hpp"
#include "pvs/rng.hpp"

namespace pvs {

GeometricRoughPath::GeometricRoughPath(std::vector<double> times, std::vector<VecN> first,
                                       std::vector<MatN> second_cum, double alpha)
    : times_(std::move(times)), first_(std::move(first)), second_(std::move(second_cum)), alpha_(alpha) {
  if (times_.size() < 2) throw ConfigError("rough path: need at least 2 samples");
  if (first_.size() != times_.size() || second_.size() != times_.size())
    throw ConfigError("rough path: level arrays must match the time array");
  m_ = first_[0].n;
  if (m_ < 1 || m_ > kMaxDim) throw ConfigError("rough path: driving dimension out of range");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1])) throw ConfigError("rough path: times must be strictly increasing");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (first_[i].n != m_) throw ConfigError("rough path: inconsistent first-level dimension");
    if (second_[i].rows != m_ || second_[i].cols != m_)
      throw ConfigError("rough path: inconsistent second-level dimension");
  }
  if (!(alpha_ > 1.0 / 3.0 && alpha_ <= 0.5))
    throw ConfigError("rough path: alpha must lie in (1/3, 1/2]");
}

std::size_t GeometricRoughPath::locate(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return 0;
  std::size_t k = static_cast<std::size_t>(it - times_.begin()) - 1;
  if (k >= times_.size() - 1) k = times_.size() - 2;
  return k;
}

VecN GeometricRoughPath::value(double t) const {
  if (t <= times_.front()) return first_.front();
  if (t >= times_.back()) return first_.back();
  std::size_t k = locate(t);
  double w = (t - times_[k]) / (times_[k + 1] - times_[k]);
  VecN r(m_);
  for (int i = 0; i < m_; ++i) r[i] = (1.0 - w) * first_[k][i] + w * first_[k + 1][i];
  return r;
}

VecN GeometricRoughPath::increment(double s, double t) const { return value(t) - value(s); }

MatN GeometricRoughPath::cumulative(double t) const {
  if (t <= times_.front()) return second_.front();
  if (t >= times_.back()) return second_.back();
  std::size_t k = locate(t);
  if (t == times_[k]) return second_[k];
  // In-segment extension: the sub-segment is a straight line, whose lift is
  // explicit.
  VecN wt = value(t);
  VecN dw = wt - first_[k];
  VecN base = first_[k] - first_.front();
  MatN c = second_[k];
  c += outer(base, dw);
  c += 0.5 * outer(dw, dw);
  return c;
}

MatN GeometricRoughPath::second_level(double s, double t) const {
  if (t < s) {
    VecN dw = value(s) - value(t);
    return outer(dw, dw) - second_level(t, s);
  }
  MatN r = cumulative(t) - cumulative(s);
  VecN base = value(s) - first_.front();
  VecN dw = increment(s, t);
  r = r - outer(base, dw);
  return r;
}

GeometricRoughPath piecewise_linear_lift(const std::vector<double>& times,
                                         const std::vector<VecN>& samples, double alpha) {
  if (times.size() != samples.size()) throw ConfigError("piecewise_linear_lift: size mismatch");
  if (times.size() < 2) throw ConfigError("piecewise_linear_lift: need at least 2 samples");
  int m = samples[0].n;
  std::vector<MatN> cum(times.size(), MatN(m, m));
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    VecN dw = samples[k + 1] - samples[k];
    VecN base = samples[k] - samples[0];
    MatN c = cum[k];
    c += outer(base, dw);
    c += 0.5 * outer(dw, dw);
    cum[k + 1] = c;
  }
  return GeometricRoughPath(times, samples, std::move(cum), alpha);
}

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

std::vector<VecN> brownian_samples_bridge(std::uint64_t seed, int m, double T, int resolution) {
  int levels = 0;
  while ((1 << levels) < resolution) ++levels;
  std::vector<VecN> w(static_cast<std::size_t>(resolution) + 1, VecN(m));
  {
    NormalSampler z(mix64(seed ^ 0x9d2c5680aull));
    for (int c = 0; c < m; ++c) w[resolution][c] = std::sqrt(T) * z();
  }
  // Midpoint (Levy bridge) refinement; level l fills the midpoints of the
  // 2^(l-1) coarse intervals. Streams are seeded per level so any dyadic
  // resolution of the same seed traverses the same trajectory.
  for (int l = 1; l <= levels; ++l) {
    NormalSampler z(mix64(seed + 0x517cc1b727220a95ull * static_cast<std::uint64_t>(l)));
    int coarse = 1 << (l - 1);
    int stride = resolution / coarse;
    double half_len = T / (1 << l);
    double sd = std::sqrt(half_len / 2.0);
    for (int k = 0; k < coarse; ++k) {
      int a = k * stride, b = (k + 1) * stride, mid = a + stride / 2;
      for (int c = 0; c < m; ++c) w[mid][c] = 0.5 * (w[a][c] + w[b][c]) + sd * z();
    }
  }
  return w;
}

std::vector<VecN> brownian_samples_iid(std::uint64_t seed, int m, double T, int resolution) {
  NormalSampler z(mix64(seed ^ 0x2545f4914f6cdd1dull));
  std::vector<VecN> w(static_cast<std::size_t>(resolution) + 1, VecN(m));
  double sd = std::sqrt(T / resolution);
  for (int k = 1; k <= resolution; ++k)
    for (int c = 0; c < m; ++c) w[k][c] = w[k - 1][c] + sd * z();
  return w;
}

}  // namespace

GeometricRoughPath brownian_lift(std::uint64_t seed, int m, double T, int resolution) {
  if (m < 1 || m > kMaxDim) throw ConfigError("brownian_lift: dimension out of range");
  if (resolution < 2) throw ConfigError("brownian_lift: resolution must be >= 2");
  if (!(T > 0.0)) throw ConfigError("brownian_lift: horizon must be positive");
  std::vector<VecN> w = is_power_of_two(resolution)
                            ? brownian_samples_bridge(seed, m, T, resolution)
                            : brownian_samples_iid(seed, m, T, resolution);
  std::vector<double> times(static_cast<std::size_t>(resolution) + 1);
  for (int i = 0; i <= resolution; ++i) times[i] = T * static_cast<double>(i) / resolution;
  GeometricRoughPath p = piecewise_linear_lift(times, w, 0.4);
  return p;
}

double chen_defect(const MatN& ww_st, const MatN& ww_su, const MatN& ww_ut, const VecN& w_s,
                   const VecN& w_u, const VecN& w_t) {
  MatN r = ww_st - ww_su - ww_ut - outer(w_u - w_s, w_t - w_u);
  return norm_max(r);
}

double chen_defect(const GeometricRoughPath& path, double s, double u, double t) {
  if (!(s <= u && u <= t)) throw ConfigError("chen_defect: need s <= u <= t");
  return chen_defect(path.second_level(s, t), path.second_level(s, u), path.second_level(u, t),
                     path.value(s), path.value(u), path.value(t));
}

double geometric_defect(const GeometricRoughPath& path, double s, double t) {
  VecN dw = path.increment(s, t);
  MatN r = sym(path.second_level(s, t)) - 0.5 * outer(dw, dw);
  return norm_max(r);
}

double holder_norm(const GeometricRoughPath& path, double alpha, Exec exec) {
  const std::size_t n = path.sample_count();
  const auto& times = path.sample_times();
  double s1 = parallel_max(n, exec, [&](std::size_t i) {
    double best = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double dt = times[j] - times[i];
      double v = norm2(path.sample_value(j) - path.sample_value(i)) / std::pow(dt, alpha);
      if (v > best) best = v;
    }
    return best;
  });
  double s2 = parallel_max(n, exec, [&](std::size_t i) {
    double best = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double dt = times[j] - times[i];
      double v = norm_max(path.second_level(times[i], times[j])) / std::pow(dt, 2.0 * alpha);
      if (v > best) best = v;
    }
    return best;
  });
  return s1 + s2;
}

namespace {

// Chen defect over sampled triples, evaluated on sample indices.
double chen_defect_idx(const GeometricRoughPath& p, std::size_t i, std::size_t j, std::size_t k) {
  const auto& t = p.sample_times();
  return chen_defect(p.second_level(t[i], t[k]), p.second_level(t[i], t[j]),
                     p.second_level(t[j], t[k]), p.sample_value(i), p.sample_value(j),
                     p.sample_value(k));
}

}  // namespace

PathValidationReport validate_path(const GeometricRoughPath& path, Exec exec) {
  PathValidationReport rep;
  const std::size_t n = path.sample_count();
  const auto& times = path.sample_times();

  // Symmetric-part defects are additive over subintervals whenever the Chen
  // identity holds, so adjacent pairs plus a decimated grid plus seeded
  // draws bound the exhaustive sweep up to accumulated roundoff.
  constexpr std::size_t kExhaustiveLimit = 160;
  std::size_t pairs = 0;
  if (n <= kExhaustiveLimit) {
    rep.max_geometric_defect = parallel_max(n, exec, [&](std::size_t i) {
      double best = 0.0;
      for (std::size_t j = i + 1; j < n; ++j)
        best = std::max(best, geometric_defect(path, times[i], times[j]));
      return best;
    });
    pairs = n * (n - 1) / 2;
  } else {
    std::size_t stride = (n + kExhaustiveLimit - 1) / kExhaustiveLimit;
    std::vector<std::size_t> picks;
    for (std::size_t i = 0; i < n; i += stride) picks.push_back(i);
    if (picks.back() != n - 1) picks.push_back(n - 1);
    const std::size_t pn = picks.size();
    double d1 = parallel_max(pn, exec, [&](std::size_t a) {
      double best = 0.0;
      for (std::size_t b = a + 1; b < pn; ++b)
        best = std::max(best, geometric_defect(path, times[picks[a]], times[picks[b]]));
      return best;
    });
    pairs += pn * (pn - 1) / 2;
    double d2 = parallel_max(n - 1, exec, [&](std::size_t i) {
      return geometric_defect(path, times[i], times[i + 1]);
    });
    pairs += n - 1;
    const std::size_t kRandomPairs = 200000;
    double d3 = parallel_max(kRandomPairs, exec, [&](std::size_t q) {
      std::uint64_t h = mix64(0x9b7a33c5u + q);
      std::size_t a = static_cast<std::size_t>(h % n);
      std::size_t b = static_cast<std::size_t>(mix64(h) % n);
      if (a > b) std::swap(a, b);
      return geometric_defect(path, times[a], times[b]);
    });
    pairs += kRandomPairs;
    rep.max_geometric_defect = std::max({d1, d2, d3});
  }
  rep.pairs_checked = pairs;

  // Chen triples. Cumulative storage makes the identity structural, so the
  // check guards reconstruction roundoff; past a few hundred samples the
  // exhaustive N^3 sweep is replaced by a decimated grid plus all adjacent
  // triples plus seeded random draws.
  double worst_chen = 0.0;
  std::size_t triples = 0;
  if (n <= kExhaustiveLimit) {
    rep.triples_exhaustive = true;
    worst_chen = parallel_max(n, exec, [&](std::size_t i) {
      double best = 0.0;
      for (std::size_t j = i; j < n; ++j)
        for (std::size_t k = j; k < n; ++k) {
          double v = chen_defect_idx(path, i, j, k);
          if (v > best) best = v;
        }
      return best;
    });
    triples = n * (n + 1) * (n + 2) / 6;
  } else {
    std::size_t stride = (n + kExhaustiveLimit - 1) / kExhaustiveLimit;
    std::vector<std::size_t> picks;
    for (std::size_t i = 0; i < n; i += stride) picks.push_back(i);
    if (picks.back() != n - 1) picks.push_back(n - 1);
    const std::size_t pn = picks.size();
    double d1 = parallel_max(pn, exec, [&](std::size_t a) {
      double best = 0.0;
      for (std::size_t b = a; b < pn; ++b)
        for (std::size_t c = b; c < pn; ++c) {
          double v = chen_defect_idx(path, picks[a], picks[b], picks[c]);
          if (v > best) best = v;
        }
      return best;
    });
    triples += pn * (pn + 1) * (pn + 2) / 6;
    double d2 = parallel_max(n - 2, exec, [&](std::size_t i) {
      return chen_defect_idx(path, i, i + 1, i + 2);
    });
    triples += n - 2;
    const std::size_t kRandomTriples = 200000;
    double d3 = parallel_max(kRandomTriples, exec, [&](std::size_t q) {
      std::uint64_t h = mix64(0x51ed2701u + q);
      std::size_t a = static_cast<std::size_t>(h % n);
      std::size_t b = static_cast<std::size_t>(mix64(h) % n);
      std::size_t c = static_cast<std::size_t>(mix64(h ^ 0xabcdu) % n);
      std::size_t lo = std::min({a, b, c}), hi = std::max({a, b, c});
      std::size_t mid = a + b + c - lo - hi;
      return chen_defect_idx(path, lo, mid, hi);
    });
    triples += kRandomTriples;
    worst_chen = std::max({d1, d2, d3});
  }
  rep.max_chen_defect = worst_chen;
  rep.triples_checked = triples;
  return rep;
}

double rough_integral(const GeometricRoughPath& path, double t0, double t1,
                      const std::function<VecN(double)>& f,
                      const std::function<MatN(double)>& fprime) {
  if (!(t0 <= t1)) throw ConfigError("rough_integral: need t0 <= t1");
  const auto& times = path.sample_times();
  std::vector<double> pts;
  pts.push_back(t0);
  for (double t : times)
    if (t > t0 && t < t1) pts.push_back(t);
  pts.push_back(t1);
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    double a = pts[k], b = pts[k + 1];
    VecN dw = path.increment(a, b);
    MatN ww = path.second_level(a, b);
    VecN fa = f(a);
    MatN fp = fprime(a);
    acc += dot(fa, dw);
    for (int i = 0; i < ww.rows; ++i)
      for (int j = 0; j < ww.cols; ++j) acc += fp(i, j) * ww(i, j);
  }
  return acc;
}

void write_path_csv(const GeometricRoughPath& path, const std::string& filename) {
  std::ofstream out(filename);
  if (!out) throw ConfigError("write_path_csv: cannot open " + filename);
  const int m = path.dim();
  out << "t";
  for (int i = 1; i <= m; ++i) out << ",W" << i;
  for (int i = 1; i <= m; ++i)
    for (int j = 1; j <= m; ++j) out << ",WW" << i << j;
  out << "\n";
  char buf[32];
  for (std::size_t k = 0; k < path.sample_count(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", path.sample_times()[k]);
    out << buf;
    for (int i = 0; i < m; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", path.sample_value(k)[i]);
      out << ',' << buf;
    }
    const MatN& ww = path.sample_second(k);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", ww(i, j));
        out << ',' << buf;
      }
    out << "\n";
  }
}

GeometricRoughPath read_path_csv(const std::string& filename, double alpha) {
  std::ifstream in(filename);
  if (!in) throw ConfigError("read_path_csv: cannot open " + filename);
  std::string header;
  if (!std::getline(in, header)) throw ConfigError("read_path_csv: empty file " + filename);
  int m = 0;
  {
    std::stringstream ss(header);
    std::string col;
    std::vector<std::string> cols;
    while (std::getline(ss, col, ',')) cols.push_back(col);
    if (cols.empty() || cols[0] != "t") throw ConfigError("read_path_csv: first column must be t");
    for (std::size_t i = 1; i < cols.size(); ++i)
      if (cols[i].size() >= 2 && cols[i][0] == 'W' && cols[i][1] != 'W') ++m;
    if (m < 1) throw ConfigError("read_path_csv: no W columns in header");
    std::size_t expect = 1 + static_cast<std::size_t>(m) + static_cast<std::size_t>(m) * m;
    if (cols.size() != expect) throw ConfigError("read_path_csv: header column count mismatch");
  }
  std::vector<double> times;
  std::vector<VecN> first;
  std::vector<MatN> second;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    if (row.size() != 1 + static_cast<std::size_t>(m) + static_cast<std::size_t>(m) * m)
      throw ConfigError("read_path_csv: row width mismatch");
    times.push_back(row[0]);
    VecN w(m);
    for (int i = 0; i < m; ++i) w[i] = row[1 + i];
    first.push_back(w);
    MatN ww(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) ww(i, j) = row[1 + m + i * m + j];
    second.push_back(ww);
  }
  return GeometricRoughPath(std::move(times), std::move(first), std::move(second), alpha);
}

}  // namespace pvs
