#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pvs/pde_solver.hpp"

namespace pvs {

/// One run, fully determined by one config file (plus CLI overrides).
struct RunConfig {
  // problem
  int dim = 1;
  double T = 1.0;
  std::string f_family = "zero";  // zero | constant | heat
  double f_param = 0.0;
  std::vector<std::string> h_exprs;  // one per driving component, in p1..pn (x1..xn allowed)
  std::string u0_expr = "0";
  // path
  std::string path_source = "brownian";  // brownian | formula | file
  std::uint64_t path_seed = 1;
  int path_resolution = 1024;              // brownian: interval count
  std::vector<std::string> path_formulas;  // formula source: W^i(t), written in x1 = t
  int path_samples = 257;
  std::string path_file;
  // numerics
  double box_lo = -1.0, box_hi = 1.0;
  int nodes = 129;
  double dt = 1e-3;
  double p_bound = -1.0;  // negative = derive from u0
  double theta_inv = 0.1;
  double tol = 1e-6;
  int levels = 3;
  // output
  std::vector<double> out_times;  // empty = {T}
  std::string out_dir = "out";
};

/// Parse the TOML-style subset: `[section]` headers and/or dotted keys,
/// `key = value` with numbers, booleans, quoted strings and flat arrays.
/// The first problem found is reported with the offending key's name.
RunConfig parse_config(const std::string& text);

RunConfig load_config(const std::string& file);

GeometricRoughPath build_path(const RunConfig& c);
FOperator build_f(const RunConfig& c);
HamiltonianSystem build_hamiltonians(const RunConfig& c);
ScalarFieldPtr build_u0(const RunConfig& c);
PDEProblem build_problem(const RunConfig& c);

}  // namespace pvs
