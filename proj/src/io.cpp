#include "pvs/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pvs/errors.hpp"

#include "json.hpp"

namespace pvs {

using ordered_json = nlohmann::ordered_json;

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

std::string read_text_file(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + file);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& file, const std::string& text) {
  std::filesystem::path p(file);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + file);
  out << text;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void write_field_csv(const std::string& file, const GridField& f) {
  const GridSpec& g = f.spec;
  std::ostringstream out;
  for (int d = 0; d < g.dim; ++d) out << "x" << (d + 1) << ",";
  out << "u\n";
  for (std::size_t j = 0; j < g.size(); ++j) {
    VecN x = g.coord(j);
    for (int d = 0; d < g.dim; ++d) out << format_g17(x[d]) << ",";
    out << format_g17(f[j]) << "\n";
  }
  write_text_file(file, out.str());
}

void write_series_csv(const std::string& dir, const std::string& base, const FieldSeries& s) {
  std::filesystem::create_directories(dir);
  std::ostringstream times;
  times << "index,t\n";
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    times << i << "," << format_g17(s.times[i]) << "\n";
    char name[32];
    std::snprintf(name, sizeof name, "%s_%03zu.csv", base.c_str(), i);
    write_field_csv(dir + "/" + name, s.frames[i]);
  }
  write_text_file(dir + "/" + base + "_times.csv", times.str());
}

namespace {

void dump(const std::string& file, const ordered_json& j) {
  write_text_file(file, j.dump(2) + "\n");
}

ordered_json vec_json(const VecN& v) {
  ordered_json a = ordered_json::array();
  for (int d = 0; d < v.n; ++d) a.push_back(v[d]);
  return a;
}

}  // namespace

void write_json_report(const std::string& file, const PathValidationReport& r) {
  ordered_json j;
  j["pairs_checked"] = r.pairs_checked;
  j["triples_checked"] = r.triples_checked;
  j["triples_exhaustive"] = r.triples_exhaustive;
  j["max_chen_defect"] = r.max_chen_defect;
  j["max_geometric_defect"] = r.max_geometric_defect;
  dump(file, j);
}

void write_json_report(const std::string& file, const HorizonReport& r) {
  ordered_json j;
  j["t0"] = r.t0;
  j["theta_inv"] = r.theta_inv;
  j["h_forward"] = r.h_forward;
  j["h_backward"] = r.h_backward;
  j["h"] = r.h;
  j["min_det_at_h"] = r.min_det_at_h;
  j["crossed_forward"] = r.crossed_forward;
  j["crossed_backward"] = r.crossed_backward;
  dump(file, j);
}

void write_json_report(const std::string& file, const PropertyReport& r) {
  ordered_json j;
  j["shift_defect"] = r.shift_defect;
  j["comparison_defects"] = r.comparison_defects;
  j["semigroup_defects"] = r.semigroup_defects;
  j["max_comparison"] = r.max_comparison();
  j["max_semigroup"] = r.max_semigroup();
  dump(file, j);
}

void write_json_report(const std::string& file, const DependenceReport& r) {
  ordered_json j;
  j["rho"] = r.rho;
  j["sup_initial"] = r.sup_initial;
  j["sup_evolved"] = r.sup_evolved;
  j["sup_global"] = r.sup_global;
  j["defect"] = r.defect;
  j["shrunken_empty"] = r.shrunken_empty;
  dump(file, j);
}

void write_json_report(const std::string& file, const SolveReport& r) {
  ordered_json j;
  j["times"] = r.times;
  j["lambda"] = r.lambda;
  j["required_dt"] = r.required_dt;
  j["p_bound"] = r.p_bound;
  j["max_substeps"] = r.max_substeps;
  j["total_substeps"] = r.total_substeps;
  ordered_json cfl = ordered_json::array();
  for (const CFLRecord& c : r.cfl) cfl.push_back({{"t", c.t}, {"substeps", c.substeps}});
  j["cfl"] = cfl;
  dump(file, j);
}

void write_json_report(const std::string& file, const RoughSolveReport& r) {
  ordered_json j;
  j["strides"] = r.cauchy.strides;
  j["d"] = r.cauchy.d;
  j["decreasing"] = r.cauchy.decreasing;
  j["finest_times"] = r.finest.times;
  j["finest_p_bound"] = r.finest.p_bound;
  dump(file, j);
}

void write_json_report(const std::string& file, const SubsolutionReport& r) {
  ordered_json j;
  ordered_json probes = ordered_json::array();
  for (const ProbeResult& p : r.probes) {
    ordered_json q;
    q["probe"] = p.probe;
    q["interior"] = p.interior;
    q["x_star"] = vec_json(p.x_star);
    q["t_star"] = p.t_star;
    q["violation"] = p.violation;
    q["flagged"] = p.flagged;
    probes.push_back(q);
  }
  j["probes"] = probes;
  j["max_violation"] = r.max_violation;
  dump(file, j);
}

void write_json_report(const std::string& file, const BumpCertificate& r) {
  ordered_json j;
  j["refused"] = r.refused;
  j["precondition_margin"] = r.precondition_margin;
  j["omega1"] = r.omega1;
  j["omega2"] = r.omega2;
  j["R"] = r.R;
  j["rho_R"] = r.rho_R;
  j["delta"] = r.delta;
  j["anchor_gain"] = r.anchor_gain;
  j["sup_gain"] = r.sup_gain;
  j["collar_time_min"] = r.collar_time_min;
  j["collar_space_min"] = r.collar_space_min;
  j["slack_time"] = r.slack_time;
  j["slack_space"] = r.slack_space;
  j["unchanged_outside"] = r.unchanged_outside;
  j["passed"] = r.passed;
  if (r.has_counterexample) {
    j["counterexample_x"] = vec_json(r.counterexample_x);
    j["counterexample_t"] = r.counterexample_t;
  }
  dump(file, j);
}

void write_json_report(const std::string& file, const CompareReport& r) {
  ordered_json j;
  j["times"] = r.times;
  j["excess"] = r.excess;
  j["initial"] = r.initial;
  j["nonincreasing_vs_initial"] = r.nonincreasing_vs_initial;
  dump(file, j);
}

void write_json_report(const std::string& file, const SubSuperPair& r) {
  ordered_json j;
  j["times"] = r.times;
  j["R"] = r.R;
  j["C_lower"] = r.C_lower;
  j["C_upper"] = r.C_upper;
  j["R0"] = r.R0;
  j["C0_lower"] = r.C0_lower;
  j["C0_upper"] = r.C0_upper;
  j["h"] = r.h;
  j["h0"] = r.h0;
  j["M_lower"] = r.M_lower;
  j["M_upper"] = r.M_upper;
  j["f_samples"] = r.f_samples;
  dump(file, j);
}

}  // namespace pvs
