#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "pvs/errors.hpp"
#include "pvs/rough_path.hpp"

using namespace pvs;

namespace {

VecN v1(double a) {
  VecN v(1);
  v[0] = a;
  return v;
}

VecN v2(double a, double b) {
  VecN v(2);
  v[0] = a;
  v[1] = b;
  return v;
}

GeometricRoughPath line1(double slope, double T, int segs) {
  std::vector<double> ts;
  std::vector<VecN> ws;
  for (int k = 0; k <= segs; ++k) {
    double t = T * k / segs;
    ts.push_back(t);
    ws.push_back(v1(slope * t));
  }
  return piecewise_linear_lift(ts, ws);
}

}  // namespace

TEST_CASE("scalar line lift forces half the squared increment") {
  auto p = piecewise_linear_lift({0.0, 1.0}, {v1(0.0), v1(1.0)});
  CHECK(p.second_level(0.0, 1.0)(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("straight segment in two components") {
  auto p = piecewise_linear_lift({0.0, 1.0}, {v2(0.0, 0.0), v2(1.0, 2.0)});
  MatN ww = p.second_level(0.0, 1.0);
  CHECK(ww(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(ww(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ww(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ww(1, 1) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("L-shaped path iterated integrals") {
  auto p = piecewise_linear_lift({0.0, 0.5, 1.0},
                                 {v2(0.0, 0.0), v2(1.0, 0.0), v2(1.0, 1.0)});
  MatN ww = p.second_level(0.0, 1.0);
  // WW(i,j) = int (W^i - W^i_s) dW^j
  CHECK(ww(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ww(1, 0) == doctest::Approx(0.0).epsilon(1e-14));
  PathValidationReport rep = validate_path(p);
  CHECK(rep.passed(1e-12));
}

TEST_CASE("forced-zero second level breaks Chen by a quarter") {
  MatN z(2, 2);
  double d = chen_defect(z, z, z, v2(0.0, 0.0), v2(0.5, 0.5), v2(1.0, 1.0));
  CHECK(d == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("degenerate triple has zero defect") {
  auto p = line1(1.0, 1.0, 4);
  CHECK(chen_defect(p, 0.5, 0.5, 0.5) <= 1e-15);
}

TEST_CASE("holder norm of the unit line at alpha one half") {
  auto p = line1(1.0, 1.0, 8);
  CHECK(holder_norm(p, 0.5) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("holder norm homogeneity in the path scale") {
  // norm(lambda W) = lambda a + lambda^2 b, so three scales satisfy a
  // linear relation that eliminates (a, b).
  std::vector<double> ts = {0.0, 0.3, 0.55, 0.8, 1.0};
  std::vector<double> vals = {0.0, 0.4, -0.1, 0.35, 0.25};
  auto scaled = [&](double lam) {
    std::vector<VecN> ws;
    for (double v : vals) ws.push_back(v1(lam * v));
    return holder_norm(piecewise_linear_lift(ts, ws), 0.5);
  };
  double s1 = scaled(1.0), s2 = scaled(2.0), s4 = scaled(4.0);
  CHECK(6.0 * (s2 - 2.0 * s1) == doctest::Approx(s4 - 4.0 * s1).epsilon(1e-10));
}

TEST_CASE("rough integral closed forms") {
  auto p = line1(1.0, 1.0, 9);
  double half = rough_integral(
      p, 0.0, 1.0, [&](double s) { return p.value(s); },
      [&](double) { MatN m(1, 1); m(0, 0) = 1.0; return m; });
  CHECK(half == doctest::Approx(0.5).epsilon(1e-13));

  double c = rough_integral(
      p, 0.2, 0.9, [&](double) { return v1(3.0); },
      [&](double) { return MatN(1, 1); });
  CHECK(c == doctest::Approx(3.0 * 0.7).epsilon(1e-13));
}

TEST_CASE("rough integral refines at second order on smooth paths") {
  // int W^2 dW = W^3/3 along W(t) = sin(t)
  auto build = [](int segs) {
    std::vector<double> ts;
    std::vector<VecN> ws;
    for (int k = 0; k <= segs; ++k) {
      double t = static_cast<double>(k) / segs;
      ts.push_back(t);
      ws.push_back(v1(std::sin(t)));
    }
    return piecewise_linear_lift(ts, ws);
  };
  double oracle = std::pow(std::sin(1.0), 3) / 3.0;
  double errs[3];
  int segs[3] = {16, 32, 64};
  for (int i = 0; i < 3; ++i) {
    auto p = build(segs[i]);
    double got = rough_integral(
        p, 0.0, 1.0, [&](double s) { VecN f(1); f[0] = p.value(s)[0] * p.value(s)[0]; return f; },
        [&](double s) { MatN m(1, 1); m(0, 0) = 2.0 * p.value(s)[0]; return m; });
    errs[i] = std::fabs(got - oracle);
  }
  CHECK(errs[1] <= errs[0] / 2.5);
  CHECK(errs[2] <= errs[1] / 2.5);
  CHECK(errs[2] <= 1e-4);
}

TEST_CASE("concatenation joins through the Chen identity") {
  std::vector<double> ts = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<VecN> ws = {v2(0, 0), v2(0.3, -0.2), v2(0.1, 0.4), v2(0.6, 0.3), v2(0.2, 0.9)};
  auto whole = piecewise_linear_lift(ts, ws);

  std::vector<double> tl(ts.begin(), ts.begin() + 3), tr(ts.begin() + 2, ts.end());
  std::vector<VecN> wl(ws.begin(), ws.begin() + 3), wr;
  for (std::size_t i = 2; i < ws.size(); ++i) wr.push_back(ws[i] + (-1.0) * ws[2]);
  auto left = piecewise_linear_lift(tl, wl);
  auto right = piecewise_linear_lift(tr, wr);

  for (double s : {0.0, 0.25}) {
    for (double t : {0.75, 1.0}) {
      MatN joined = left.second_level(s, 0.5) + right.second_level(0.5, t) +
                    outer(left.increment(s, 0.5), right.increment(0.5, t));
      MatN direct = whole.second_level(s, t);
      CHECK(norm_max(joined + (-1.0) * direct) <= 1e-12);
    }
  }
}

TEST_CASE("brownian lift is a pure function of its arguments") {
  auto a = brownian_lift(9, 2, 1.0, 256);
  auto b = brownian_lift(9, 2, 1.0, 256);
  REQUIRE(a.sample_count() == b.sample_count());
  for (std::size_t i = 0; i < a.sample_count(); ++i) {
    CHECK(norm_inf(a.sample_value(i) + (-1.0) * b.sample_value(i)) == 0.0);
    CHECK(norm_max(a.sample_second(i) + (-1.0) * b.sample_second(i)) == 0.0);
  }
  CHECK(a.alpha() == 0.4);
}

TEST_CASE("dyadic refinement keeps the coarse anchors") {
  auto coarse = brownian_lift(9, 2, 1.0, 256);
  auto fine = brownian_lift(9, 2, 1.0, 512);
  for (std::size_t i = 0; i < coarse.sample_count(); ++i) {
    CHECK(norm_inf(fine.sample_value(2 * i) + (-1.0) * coarse.sample_value(i)) == 0.0);
  }
}

TEST_CASE("brownian lifts stay geometric and Chen-consistent") {
  auto p = brownian_lift(17, 2, 1.0, 512);
  PathValidationReport rep = validate_path(p);
  CHECK(rep.max_chen_defect <= 1e-12);
  CHECK(rep.max_geometric_defect <= 1e-12);
}

TEST_CASE("holder norm bounded over dyadic refinements") {
  for (int res : {256, 512, 1024, 2048}) {
    auto p = brownian_lift(5, 1, 1.0, res);
    CHECK(holder_norm(p, 0.4) <= 8.0);
  }
}

TEST_CASE("terminal variance matches the Brownian law") {
  // E[W_i(1)^2] = 1; 3 standard errors of the chi-square estimator over
  // 10^4 seeds is 3*sqrt(2/N).
  const int N = 10000;
  double acc = 0.0;
  for (int s = 0; s < N; ++s) {
    auto p = brownian_lift(1000 + static_cast<std::uint64_t>(s), 2, 1.0, 64);
    VecN w = p.value(1.0);
    acc += 0.5 * (w[0] * w[0] + w[1] * w[1]);
  }
  double mean = acc / N;
  CHECK(std::fabs(mean - 1.0) <= 3.0 * std::sqrt(2.0 / N));
}

TEST_CASE("lift input validation") {
  CHECK_THROWS_AS(piecewise_linear_lift({0.0, 0.0}, {v1(0), v1(1)}), ConfigError);
  CHECK_THROWS_AS(piecewise_linear_lift({}, {}), ConfigError);
  CHECK_THROWS_AS(brownian_lift(1, 1, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(brownian_lift(1, 1, -1.0, 64), ConfigError);
}

TEST_CASE("path csv round trip") {
  auto p = brownian_lift(23, 2, 0.5, 128);
  std::string file = (std::filesystem::temp_directory_path() / "pvs_path_rt.csv").string();
  write_path_csv(p, file);
  auto q = read_path_csv(file, 0.4);
  REQUIRE(q.sample_count() == p.sample_count());
  double worst = 0.0;
  for (std::size_t i = 0; i < p.sample_count(); ++i) {
    worst = std::max(worst, norm_inf(p.sample_value(i) + (-1.0) * q.sample_value(i)));
    worst = std::max(worst, norm_max(p.sample_second(i) + (-1.0) * q.sample_second(i)));
  }
  CHECK(worst <= 1e-15);
  CHECK(validate_path(q).passed(1e-10));
  std::filesystem::remove(file);
}
