#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pvs/exec.hpp"
#include "pvs/linalg.hpp"

namespace pvs {

/// Sampled geometric rough path over [times.front(), times.back()]: first
/// level W(t_i) in R^m plus the cumulative second level WW(0,t_i) in
/// R^{m x m}. Between samples W is piecewise-linear and the second level is
/// the exact lift of that interpolant. Arbitrary two-parameter blocks
/// WW(s,t) are reconstructed from the cumulative data through the Chen
/// identity, so storage stays linear in the sample count.
class GeometricRoughPath {
 public:
  GeometricRoughPath(std::vector<double> times, std::vector<VecN> first,
                     std::vector<MatN> second_cum, double alpha);

  int dim() const { return m_; }
  double alpha() const { return alpha_; }
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  std::size_t sample_count() const { return times_.size(); }
  const std::vector<double>& sample_times() const { return times_; }
  const VecN& sample_value(std::size_t i) const { return first_[i]; }
  const MatN& sample_second(std::size_t i) const { return second_[i]; }

  /// W at time t; piecewise-linear between samples, clamped at the ends.
  VecN value(double t) const;

  VecN increment(double s, double t) const;

  /// WW(s,t) for any s, t in range. For t < s the block is the reversed
  /// integral, consistent with running the expansion backward.
  MatN second_level(double s, double t) const;

  /// Index of the last sample time <= t.
  std::size_t locate(double t) const;

 private:
  MatN cumulative(double t) const;

  std::vector<double> times_;
  std::vector<VecN> first_;
  std::vector<MatN> second_;
  int m_;
  double alpha_;
};

/// Exact canonical lift of the piecewise-linear interpolant of the samples.
GeometricRoughPath piecewise_linear_lift(const std::vector<double>& times,
                                         const std::vector<VecN>& samples, double alpha = 0.5);

/// Deterministic Brownian sample path lifted as a fine piecewise-linear
/// path. A pure function of its arguments. For power-of-two resolutions the
/// path is built by dyadic midpoint refinement, so doubling the resolution
/// refines the same trajectory instead of resampling a new one. Reported
/// Holder exponent is 0.4.
GeometricRoughPath brownian_lift(std::uint64_t seed, int m, double T, int resolution);

/// |WW_st - WW_su - WW_ut - (W_u - W_s) (x) (W_t - W_u)| in the max norm,
/// evaluated directly on the supplied blocks.
double chen_defect(const MatN& ww_st, const MatN& ww_su, const MatN& ww_ut, const VecN& w_s,
                   const VecN& w_u, const VecN& w_t);

/// Same defect with all blocks taken from the path at s <= u <= t.
double chen_defect(const GeometricRoughPath& path, double s, double u, double t);

/// |Sym(WW_st) - (1/2)(W_t - W_s) (x) (W_t - W_s)| in the max norm.
double geometric_defect(const GeometricRoughPath& path, double s, double t);

/// sup |W_s - W_t| / |s-t|^alpha + sup |WW_st| / |s-t|^(2 alpha) over all
/// sampled pairs (Euclidean norm on the first level, max norm on the second).
double holder_norm(const GeometricRoughPath& path, double alpha, Exec exec = Exec::parallel);

struct PathValidationReport {
  std::size_t pairs_checked = 0;
  std::size_t triples_checked = 0;
  bool triples_exhaustive = false;
  double max_chen_defect = 0.0;
  double max_geometric_defect = 0.0;
  bool passed(double tol) const { return max_chen_defect <= tol && max_geometric_defect <= tol; }
};

/// Geometric defect at every sampled pair; Chen defect at every sampled
/// triple when the sample count allows exhausting them, otherwise at a
/// deterministic stratified family (decimated grid, all adjacent triples,
/// and seeded random draws).
PathValidationReport validate_path(const GeometricRoughPath& path, Exec exec = Exec::parallel);

/// Compensated Riemann sum of the rough integral of f against the path over
/// [t0, t1]: sum of f(a) . dW + <fprime(a), WW(a,b)> over sample intervals.
/// fprime is the controlled derivative, fprime(i,j) = d f_j / d W^i.
double rough_integral(const GeometricRoughPath& path, double t0, double t1,
                      const std::function<VecN(double)>& f,
                      const std::function<MatN(double)>& fprime);

void write_path_csv(const GeometricRoughPath& path, const std::string& filename);
GeometricRoughPath read_path_csv(const std::string& filename, double alpha = 0.5);

}  // namespace pvs
