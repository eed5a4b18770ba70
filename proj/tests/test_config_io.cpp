#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "pvs/config.hpp"
#include "pvs/errors.hpp"
#include "pvs/io.hpp"

using namespace pvs;

namespace {

const char* kGood = R"cfg([problem]
dim = 1
T = 0.5
F = "heat"
F_param = 1.0
H = ["0.5*p1^2"]
u0 = "exp(-2.0*x1^2)"

[path]
source = "formula"
formula = ["0.1*x1"]
samples = 257

[numerics]
box_lo = -3.0
box_hi = 3.0
nodes = 129
dt = 5e-4
p_bound = 3.0
tol = 1e-6
levels = 3

[output]
times = [0.25, 0.5]
dir = "out"
)cfg";

std::string with_line(const std::string& extra) { return std::string(kGood) + extra + "\n"; }

}  // namespace

TEST_CASE("config happy path") {
  RunConfig c = parse_config(kGood);
  CHECK(c.dim == 1);
  CHECK(c.T == 0.5);
  CHECK(c.f_family == "heat");
  CHECK(c.f_param == 1.0);
  REQUIRE(c.h_exprs.size() == 1);
  CHECK(c.h_exprs[0] == "0.5*p1^2");
  CHECK(c.path_source == "formula");
  CHECK(c.path_samples == 257);
  CHECK(c.nodes == 129);
  CHECK(c.dt == 5e-4);
  CHECK(c.p_bound == 3.0);
  CHECK(c.levels == 3);
  REQUIRE(c.out_times.size() == 2);
  CHECK(c.out_times[1] == 0.5);
  CHECK(c.out_dir == "out");

  // And the builders accept it.
  PDEProblem prob = build_problem(c);
  CHECK(prob.grid.size() == 129);
  CHECK(prob.T == 0.5);
  CHECK(prob.path.value(0.5)[0] == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("dotted keys work without section headers") {
  RunConfig c =
      parse_config("problem.T = 2.0\nproblem.H = [\"0.5*p1^2\"]\nproblem.u0 = \"x1\"\n");
  CHECK(c.T == 2.0);
  CHECK(c.u0_expr == "x1");
}

TEST_CASE("config rejects malformed input with the offending key") {
  auto message_has = [](const std::string& text, const std::string& needle) {
    try {
      parse_config(text);
      return false;
    } catch (const ConfigError& e) {
      return std::string(e.what()).find(needle) != std::string::npos;
    }
  };

  CHECK(message_has(with_line("[problem]\nT = 1.0"), "duplicate key `problem.T`"));
  CHECK(message_has(with_line("[problem]\nbogus = 1"), "unknown key `problem.bogus`"));
  CHECK(message_has("problem.T = -1.0\n", "problem.T"));
  CHECK(message_has(with_line("[numerics]\ntheta_inv = 1.5"), "theta_inv"));
  CHECK(message_has(with_line("[outputs]\nx = 1"), "unknown key"));

  std::string bad_times = kGood;
  bad_times.replace(bad_times.find("[0.25, 0.5]"), 11, "[0.5, 0.25]");
  CHECK(message_has(bad_times, "output.times"));

  std::string mismatch = kGood;
  mismatch.replace(mismatch.find("formula = [\"0.1*x1\"]"), 20,
                   "formula = [\"0.1*x1\", \"x1\"]");
  CHECK(message_has(mismatch, "path.formula"));
}

TEST_CASE("config hash is stable fnv-1a") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64(kGood) == fnv1a64(kGood));
  CHECK(fnv1a64(kGood) != fnv1a64(with_line("# comment")));
}

TEST_CASE("g17 formatting round-trips doubles") {
  for (double v : {0.1, 1.0 / 3.0, 6.02e23, -5.4e-13, 0.0}) {
    CHECK(std::stod(format_g17(v)) == v);
  }
}

TEST_CASE("field csv writes one row per node") {
  std::array<int, kMaxDim> shape{};
  shape[0] = 5;
  VecN lo(1);
  lo[0] = -1.0;
  GridSpec g = GridSpec::make(lo, 0.5, shape, 1);
  GridField f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = 0.1 * static_cast<double>(i) - 1.0 / 3.0;
  auto file = (std::filesystem::temp_directory_path() / "pvs_field_rt.csv").string();
  write_field_csv(file, f);
  std::string text = read_text_file(file);
  CHECK(std::count(text.begin(), text.end(), '\n') == 6);  // header + 5 rows
  CHECK(text.find(format_g17(-1.0 / 3.0)) != std::string::npos);
  std::filesystem::remove(file);
}

TEST_CASE("brownian config builds a validated path") {
  RunConfig c = parse_config(kGood);
  c.path_source = "brownian";
  c.path_seed = 7;
  c.path_resolution = 256;
  GeometricRoughPath p = build_path(c);
  CHECK(p.sample_count() == 257);
  CHECK(validate_path(p).passed(1e-12));
  GeometricRoughPath q = build_path(c);
  CHECK(norm_inf(p.value(0.5) + (-1.0) * q.value(0.5)) == 0.0);
}
